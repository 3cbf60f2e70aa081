#include "grasskern/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "grasskern/error.hpp"
#include "grasskern/format.hpp"

namespace grasskern {

namespace {

constexpr std::string_view kSvmHeader = "grasskern-svm-model 1";
constexpr std::string_view kHashHeader = "grasskern-hash-family 1";

std::string_view split_header(std::string_view text, std::string_view expected) {
  const auto nl = text.find('\n');
  const auto first = trim(text.substr(0, nl));
  if (first != expected)
    throw ParseError("expected header '" + std::string(expected) + "', found '" + std::string(first) + "'");
  return nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
}

std::string subspace_line(const Subspace& s) {
  return join_17(s.basis().data(), static_cast<std::size_t>(s.basis().size()));
}

Subspace subspace_from(std::span<const double> v, Eigen::Index d, Eigen::Index p, std::string_view what) {
  if (static_cast<Eigen::Index>(v.size()) != d * p)
    throw ParseError(std::string(what) + ": expected " + std::to_string(d * p) + " numbers, found " +
                     std::to_string(v.size()));
  Matrix m(d, p);
  std::copy(v.begin(), v.end(), m.data());
  return Subspace(std::move(m));
}

// Parsed records with single-valued keys in a map and repeated keys in order.
struct Fields {
  std::map<std::string, std::string, std::less<>> single;
  std::map<std::string, std::vector<std::string>, std::less<>> repeated;

  const std::string& get(std::string_view key, std::string_view what) const {
    const auto it = single.find(key);
    if (it == single.end()) throw ParseError(std::string(what) + ": missing '" + std::string(key) + "'");
    return it->second;
  }
  const std::vector<std::string>& many(std::string_view key) const {
    static const std::vector<std::string> none;
    const auto it = repeated.find(key);
    return it == repeated.end() ? none : it->second;
  }
};

Fields collect(std::string_view body, std::string_view what, std::initializer_list<std::string_view> single_keys,
               std::initializer_list<std::string_view> repeated_keys) {
  Fields f;
  for (auto& r : parse_records(body, what)) {
    if (std::find(repeated_keys.begin(), repeated_keys.end(), r.key) != repeated_keys.end()) {
      f.repeated[r.key].push_back(std::move(r.value));
    } else if (std::find(single_keys.begin(), single_keys.end(), r.key) != single_keys.end()) {
      if (!f.single.emplace(r.key, std::move(r.value)).second)
        throw ParseError(std::string(what) + " line " + std::to_string(r.line) + ": duplicate '" + r.key + "'");
    } else {
      throw ParseError(std::string(what) + " line " + std::to_string(r.line) + ": unknown key '" + r.key + "'");
    }
  }
  return f;
}

double number(const Fields& f, std::string_view key, std::string_view what) {
  double v = 0.0;
  if (!parse_double(f.get(key, what), v)) throw ParseError(std::string(what) + ": bad value for '" + std::string(key) + "'");
  return v;
}

bool boolean(const Fields& f, std::string_view key, std::string_view what) {
  const auto& v = f.get(key, what);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError(std::string(what) + ": '" + std::string(key) + "' must be true or false");
}

}  // namespace

std::string serialize_svm(const machines::SvmModel& m) {
  std::ostringstream os;
  os << kSvmHeader << '\n';
  os << "spec = " << m.spec.to_record() << '\n';
  os << "C = " << format_17(m.C) << '\n';
  os << "bias = " << format_17(m.bias) << '\n';
  os << "kernel_shift = " << format_17(m.kernel_shift) << '\n';
  os << "iterations = " << m.iterations << '\n';
  os << "kkt_residual = " << format_17(m.kkt_residual) << '\n';
  os << "duality_gap = " << format_17(m.duality_gap) << '\n';
  os << "converged = " << (m.converged ? "true" : "false") << '\n';
  const bool with_refs = !m.training_refs.empty();
  os << "d = " << (with_refs ? m.training_refs.front().ambient_dim() : 0) << '\n';
  os << "p = " << m.spec.subspace_dim() << '\n';
  os << "support_count = " << m.support_indices.size() << '\n';
  for (std::size_t s = 0; s < m.support_indices.size(); ++s)
    os << "support = " << m.support_indices[s] << ' ' << format_17(m.dual_coefficients[s]) << '\n';
  for (const auto& r : m.training_refs) os << "subspace = " << subspace_line(r) << '\n';
  return os.str();
}

machines::SvmModel parse_svm(std::string_view text) {
  constexpr std::string_view what = "svm model";
  const auto f = collect(split_header(text, kSvmHeader), what,
                         {"spec", "C", "bias", "kernel_shift", "iterations", "kkt_residual", "duality_gap",
                          "converged", "d", "p", "support_count"},
                         {"support", "subspace"});
  const auto p = parse_integer(f.get("p", what), what);
  const auto d = parse_integer(f.get("d", what), what);
  machines::SvmModel m{.spec = KernelSpec::parse_record(f.get("spec", what), p)};
  m.C = number(f, "C", what);
  m.bias = number(f, "bias", what);
  m.kernel_shift = number(f, "kernel_shift", what);
  m.iterations = static_cast<std::size_t>(parse_integer(f.get("iterations", what), what));
  m.kkt_residual = number(f, "kkt_residual", what);
  m.duality_gap = number(f, "duality_gap", what);
  m.converged = boolean(f, "converged", what);
  const auto count = static_cast<std::size_t>(parse_integer(f.get("support_count", what), what));
  if (f.many("support").size() != count) throw ParseError("svm model: support_count disagrees with support lines");
  for (const auto& line : f.many("support")) {
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw ParseError("svm model: support line needs '<index> <coefficient>'");
    m.support_indices.push_back(static_cast<int>(parse_integer(trim(std::string_view(line).substr(0, sp)), what)));
    double v = 0.0;
    if (!parse_double(trim(std::string_view(line).substr(sp + 1)), v)) throw ParseError("svm model: bad coefficient");
    m.dual_coefficients.push_back(v);
  }
  const auto& subs = f.many("subspace");
  if (!subs.empty() && subs.size() != count) throw ParseError("svm model: subspace count disagrees with support_count");
  for (const auto& line : subs) m.training_refs.push_back(subspace_from(parse_numbers(line, what), d, p, what));
  return m;
}

std::string serialize_hash_family(const machines::HashFamily& h) {
  std::ostringstream os;
  os << kHashHeader << '\n';
  os << "spec = " << h.spec.to_record() << '\n';
  os << "bits = " << h.bit_count << '\n';
  os << "anchors = " << h.anchors_per_bit << '\n';
  os << "d = " << (h.pool_refs.empty() ? 0 : h.pool_refs.front().ambient_dim()) << '\n';
  os << "p = " << h.spec.subspace_dim() << '\n';
  for (int r = 0; r < h.bit_count; ++r) {
    os << "bit =";
    for (int i : h.anchor_indices[static_cast<std::size_t>(r)]) os << ' ' << i;
    os << " :";
    for (int a = 0; a < h.anchors_per_bit; ++a) os << ' ' << format_17(h.projection_weights(a, r));
    os << '\n';
  }
  for (std::size_t m = 0; m < h.pool_refs.size(); ++m)
    os << "anchor = " << h.pool[m] << " : " << subspace_line(h.pool_refs[m]) << '\n';
  return os.str();
}

machines::HashFamily parse_hash_family(std::string_view text) {
  constexpr std::string_view what = "hash family";
  const auto f = collect(split_header(text, kHashHeader), what, {"spec", "bits", "anchors", "d", "p"},
                         {"bit", "anchor"});
  const auto p = parse_integer(f.get("p", what), what);
  const auto d = parse_integer(f.get("d", what), what);
  machines::HashFamily h{.spec = KernelSpec::parse_record(f.get("spec", what), p)};
  h.bit_count = static_cast<int>(parse_integer(f.get("bits", what), what));
  h.anchors_per_bit = static_cast<int>(parse_integer(f.get("anchors", what), what));
  if (h.bit_count <= 0 || h.anchors_per_bit <= 0) throw ParseError("hash family: bits and anchors must be positive");
  const auto& bits = f.many("bit");
  if (bits.size() != static_cast<std::size_t>(h.bit_count)) throw ParseError("hash family: bit line count disagrees with bits");
  h.projection_weights = Matrix(h.anchors_per_bit, h.bit_count);
  for (int r = 0; r < h.bit_count; ++r) {
    const std::string_view line = bits[static_cast<std::size_t>(r)];
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("hash family: bit line needs '<indices> : <weights>'");
    const auto idx = parse_numbers(line.substr(0, colon), what);
    const auto w = parse_numbers(line.substr(colon + 1), what);
    if (idx.size() != static_cast<std::size_t>(h.anchors_per_bit) || w.size() != idx.size())
      throw ParseError("hash family: bit " + std::to_string(r) + " needs " + std::to_string(h.anchors_per_bit) +
                       " indices and weights");
    std::vector<int> ids;
    for (double v : idx) {
      if (v < 0 || v != static_cast<double>(static_cast<int>(v))) throw ParseError("hash family: bad anchor index");
      ids.push_back(static_cast<int>(v));
    }
    for (std::size_t a = 0; a < w.size(); ++a) h.projection_weights(static_cast<Eigen::Index>(a), r) = w[a];
    h.anchor_indices.push_back(std::move(ids));
  }
  for (const auto& a : h.anchor_indices) h.pool.insert(h.pool.end(), a.begin(), a.end());
  std::sort(h.pool.begin(), h.pool.end());
  h.pool.erase(std::unique(h.pool.begin(), h.pool.end()), h.pool.end());
  const auto& anchors = f.many("anchor");
  if (!anchors.empty()) {
    if (anchors.size() != h.pool.size()) throw ParseError("hash family: anchor subspace count disagrees with bit lines");
    for (std::size_t m = 0; m < anchors.size(); ++m) {
      const std::string_view line = anchors[m];
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) throw ParseError("hash family: anchor line needs '<index> : <basis>'");
      if (parse_integer(trim(line.substr(0, colon)), what) != h.pool[m])
        throw ParseError("hash family: anchor lines must list the anchor pool in ascending order");
      h.pool_refs.push_back(subspace_from(parse_numbers(line.substr(colon + 1), what), d, p, what));
    }
  }
  return h;
}

std::string serialize_hash_keys(std::span<const machines::HashKey> keys) {
  std::string out;
  for (const auto& k : keys) out += k.to_hex() + '\n';
  return out;
}

std::vector<machines::HashKey> parse_hash_keys(std::string_view text, int bits) {
  std::vector<machines::HashKey> out;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    const auto t = trim(line);
    if (!t.empty()) out.push_back(machines::HashKey::from_hex(t, bits));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace grasskern
