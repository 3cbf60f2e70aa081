#include "grasskern/harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "grasskern/error.hpp"
#include "grasskern/format.hpp"
#include "grasskern/sampling.hpp"

namespace grasskern::harness {

std::string Dataset::fingerprint() const { return grasskern::fingerprint(subspaces); }

std::vector<int> Dataset::classes() const {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

void Dataset::validate() const {
  for (const auto& s : subspaces)
    if (s.ambient_dim() != ambient_dim() || s.dim() != dim())
      throw DimensionMismatch("dataset '" + name + "' mixes subspace dimensions");
  if (has_labels() && labels.size() != subspaces.size())
    throw DimensionMismatch("dataset '" + name + "' has " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(subspaces.size()) + " subspaces");
}

Dataset generate_planted(const PlantedOptions& o) {
  if (o.p <= 0 || o.p >= o.d)
    throw InvalidDimensions("planted data needs 0 < p < d, got p=" + std::to_string(o.p) + " d=" + std::to_string(o.d));
  if (o.classes <= 0 || o.per_class <= 0) throw InvalidDimensions("planted data needs positive class counts");
  if (!(o.noise_angle >= 0.0 && o.noise_angle < std::numbers::pi / 2))
    throw InvalidArgument("noise_angle must lie in [0, pi/2)");
  if (o.noise_angle > 0.0 && 2 * o.p > o.d)
    throw InvalidDimensions("perturbing a " + std::to_string(o.p) + "-dimensional prototype needs d >= 2p");
  if (o.orthogonal_prototypes && o.classes * o.p > o.d)
    throw InvalidDimensions("orthogonal prototypes need classes * p <= d");

  Rng rng(o.seed);
  std::vector<Matrix> protos;
  if (o.orthogonal_prototypes) {
    const Matrix q = random_orthogonal(o.d, rng);
    for (int c = 0; c < o.classes; ++c) protos.push_back(q.middleCols(c * o.p, o.p));
  } else {
    for (int c = 0; c < o.classes; ++c) protos.push_back(random_subspace(o.d, o.p, rng).basis());
  }

  Dataset out{o.name, {}, {}};
  std::uniform_real_distribution<double> angle(0.0, o.noise_angle);
  for (int c = 0; c < o.classes; ++c) {
    const Matrix& proto = protos[static_cast<std::size_t>(c)];
    for (int m = 0; m < o.per_class; ++m) {
      Matrix basis = proto;
      if (o.noise_angle > 0.0) {
        Matrix w = gaussian_matrix(o.d, o.p, rng);
        w -= proto * (proto.transpose() * w);
        w = numerics::orthonormalize(w);
        for (Eigen::Index i = 0; i < o.p; ++i) {
          const double t = angle(rng);
          basis.col(i) = std::cos(t) * proto.col(i) + std::sin(t) * w.col(i);
        }
      }
      out.subspaces.push_back(Subspace(numerics::orthonormalize(basis)).rebased(random_orthogonal(o.p, rng)));
      out.labels.push_back(c);
    }
  }
  return out;
}

std::optional<std::string> planted_warning(const PlantedOptions& o) {
  if (o.classes * o.p > o.d)
    return "classes * p = " + std::to_string(o.classes * o.p) + " exceeds d = " + std::to_string(o.d) +
           "; class prototypes will overlap";
  return std::nullopt;
}

Subspace subspace_from_samples(const Matrix& data, Eigen::Index p) {
  if (p <= 0 || p >= data.rows())
    throw InvalidDimensions("subspace_from_samples needs 0 < p < d, got p=" + std::to_string(p));
  if (data.cols() < p)
    throw RankDeficient("subspace_from_samples: " + std::to_string(data.cols()) + " samples cannot span p=" +
                        std::to_string(p));
  const auto s = numerics::svd(data);
  const double top = s.singular_values(0);
  if (!(top > 0.0) || s.singular_values(p - 1) < 1e-10 * top)
    throw RankDeficient("subspace_from_samples: data matrix has rank below p=" + std::to_string(p));
  return Subspace::from_span(s.U.leftCols(p));
}

std::string serialize_dataset(const Dataset& data) {
  data.validate();
  std::ostringstream os;
  os << "format_version = 1\n";
  os << "kind = dataset\n";
  os << "name = " << data.name << '\n';
  os << "d = " << data.ambient_dim() << '\n';
  os << "p = " << data.dim() << '\n';
  os << "n = " << data.size() << '\n';
  if (data.has_labels()) {
    os << "labels =";
    for (int l : data.labels) os << ' ' << l;
    os << '\n';
  }
  for (const auto& s : data.subspaces)
    os << "subspace = " << join_17(s.basis().data(), static_cast<std::size_t>(s.basis().size())) << '\n';
  return os.str();
}

Dataset parse_dataset(std::string_view text) {
  constexpr std::string_view what = "dataset";
  std::map<std::string, std::string, std::less<>> single;
  std::vector<const Record*> rows;
  const auto records = parse_records(text, what);
  for (const auto& r : records) {
    if (r.key == "subspace") {
      rows.push_back(&r);
    } else if (r.key == "format_version" || r.key == "kind" || r.key == "name" || r.key == "d" || r.key == "p" ||
               r.key == "n" || r.key == "labels") {
      if (!single.emplace(r.key, r.value).second)
        throw ParseError("dataset line " + std::to_string(r.line) + ": duplicate '" + r.key + "'");
    } else {
      throw ParseError("dataset line " + std::to_string(r.line) + ": unknown key '" + r.key + "'");
    }
  }
  const auto need = [&](std::string_view key) -> const std::string& {
    const auto it = single.find(key);
    if (it == single.end()) throw ParseError("dataset: missing '" + std::string(key) + "'");
    return it->second;
  };
  if (need("format_version") != "1") throw ParseError("dataset: unsupported format_version " + need("format_version"));
  if (need("kind") != "dataset") throw ParseError("dataset: kind must be 'dataset'");
  const auto d = parse_integer(need("d"), what);
  const auto p = parse_integer(need("p"), what);
  const auto n = parse_integer(need("n"), what);
  if (static_cast<long long>(rows.size()) != n)
    throw ParseError("dataset: n = " + std::to_string(n) + " but " + std::to_string(rows.size()) + " subspace lines");
  Dataset out{single.contains("name") ? single["name"] : std::string{}, {}, {}};
  for (const auto* r : rows) {
    const auto v = parse_numbers(r->value, what);
    if (static_cast<long long>(v.size()) != d * p)
      throw ParseError("dataset line " + std::to_string(r->line) + ": expected " + std::to_string(d * p) +
                       " numbers, found " + std::to_string(v.size()));
    Matrix m(d, p);
    std::copy(v.begin(), v.end(), m.data());
    out.subspaces.emplace_back(std::move(m));
  }
  if (single.contains("labels")) {
    for (double v : parse_numbers(single["labels"], what)) {
      if (v != std::floor(v)) throw ParseError("dataset: labels must be integers");
      out.labels.push_back(static_cast<int>(v));
    }
  }
  out.validate();
  return out;
}

std::string gram_to_csv(const GramMatrix& g) {
  std::ostringstream os;
  os << "# format_version=1; spec=" << g.spec.to_record() << "; p=" << g.spec.subspace_dim()
     << "; fingerprint=" << g.dataset_fingerprint << "; n=" << g.size() << '\n';
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      if (j) os << ',';
      os << format_17(g.values(i, j));
    }
    os << '\n';
  }
  return os.str();
}

GramMatrix gram_from_csv(std::string_view text, Eigen::Index p_hint) {
  const auto nl = text.find('\n');
  auto header = trim(text.substr(0, nl));
  if (header.empty() || header.front() != '#') throw ParseError("gram csv: missing header line");
  header.remove_prefix(1);
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t pos = 0;
  while (pos < header.size()) {
    const auto end = header.find(';', pos);
    const auto field = trim(header.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? header.size() : end + 1;
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw ParseError("gram csv: bad header field '" + std::string(field) + "'");
    kv[std::string(trim(field.substr(0, eq)))] = std::string(trim(field.substr(eq + 1)));
  }
  if (kv["format_version"] != "1") throw ParseError("gram csv: unsupported format_version");
  const auto p = kv.contains("p") ? parse_integer(kv["p"], "gram csv") : p_hint;
  const auto spec = KernelSpec::parse_record(kv["spec"], p);
  const auto n = parse_integer(kv["n"], "gram csv");
  Matrix k(n, n);
  std::istringstream rows{std::string(nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1))};
  std::string line;
  Eigen::Index i = 0;
  while (std::getline(rows, line)) {
    if (trim(line).empty()) continue;
    if (i >= n) throw ParseError("gram csv: more rows than n");
    std::replace(line.begin(), line.end(), ',', ' ');
    const auto v = parse_numbers(line, "gram csv");
    if (static_cast<Eigen::Index>(v.size()) != n) throw ParseError("gram csv: row " + std::to_string(i) + " has wrong length");
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = v[static_cast<std::size_t>(j)];
    ++i;
  }
  if (i != n) throw ParseError("gram csv: expected " + std::to_string(n) + " rows");
  return {std::move(k), spec, kv["fingerprint"]};
}

Split stratified_split(std::span<const int> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train_fraction must lie in (0, 1)");
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  Rng rng(seed);
  Split out;
  for (auto& [_, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto m = static_cast<long>(members.size());
    long take = std::lround(train_fraction * static_cast<double>(m));
    if (m >= 2) take = std::clamp(take, 1L, m - 1);
    out.train.insert(out.train.end(), members.begin(), members.begin() + take);
    out.test.insert(out.test.end(), members.begin() + take, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace grasskern::harness
