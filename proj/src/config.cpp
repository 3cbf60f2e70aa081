#include "grasskern/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

#include "grasskern/error.hpp"
#include "grasskern/format.hpp"

namespace grasskern::harness {

namespace {

double real(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!parse_double(v, out) || !std::isfinite(out))
    throw ParseError("config: '" + std::string(key) + "' needs a number, got '" + std::string(v) + "'");
  return out;
}

long long integer(std::string_view key, std::string_view v) {
  return parse_integer(v, "config key '" + std::string(key) + "'");
}

int positive(std::string_view key, std::string_view v) {
  const auto n = integer(key, v);
  if (n <= 0 || n > 1'000'000'000) throw ParseError("config: '" + std::string(key) + "' must be a positive integer");
  return static_cast<int>(n);
}

bool flag(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("config: '" + std::string(key) + "' must be true or false");
}

std::vector<double> reals(std::string_view key, std::string_view v) {
  std::string s(v);
  std::replace(s.begin(), s.end(), ',', ' ');
  auto out = parse_numbers(s, "config key '" + std::string(key) + "'");
  if (out.empty()) throw ParseError("config: '" + std::string(key) + "' needs at least one value");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(' ');
    if constexpr (std::is_floating_point_v<T>) out += format_shortest(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "task") {
    if (std::find(known_tasks().begin(), known_tasks().end(), value) == known_tasks().end())
      throw ParseError("config: unknown task '" + std::string(value) + "'");
    task = value;
  } else if (key == "seed") {
    const auto s = integer(key, value);
    if (s < 0) throw ParseError("config: seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "kernel") {
    kernels.emplace_back(value);
  } else if (key == "dataset") {
    dataset = value;
  } else if (key == "d") {
    d = positive(key, value);
  } else if (key == "p") {
    p = positive(key, value);
  } else if (key == "classes") {
    classes = positive(key, value);
  } else if (key == "per_class") {
    per_class = positive(key, value);
  } else if (key == "noise_angle") {
    noise_angle = real(key, value);
  } else if (key == "orthogonal") {
    orthogonal = flag(key, value);
  } else if (key == "splits") {
    splits = positive(key, value);
  } else if (key == "train_fraction") {
    train_fraction = real(key, value);
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ParseError("config: train_fraction must lie in (0, 1)");
  } else if (key == "C") {
    C = real(key, value);
    if (!(C > 0.0)) throw ParseError("config: C must be positive");
  } else if (key == "k") {
    const auto v = integer(key, value);
    if (v < 0) throw ParseError("config: k must be non-negative");
    k = static_cast<int>(v);
  } else if (key == "restarts") {
    restarts = positive(key, value);
  } else if (key == "bits") {
    bits.clear();
    for (double b : reals(key, value)) {
      if (b <= 0 || b != std::floor(b)) throw ParseError("config: bits must be positive integers");
      bits.push_back(static_cast<int>(b));
    }
  } else if (key == "anchors") {
    anchors = positive(key, value);
  } else if (key == "top_m") {
    top_m = positive(key, value);
  } else if (key == "lambda") {
    lambda = real(key, value);
    if (!(lambda > 0.0)) throw ParseError("config: lambda must be positive");
  } else if (key == "cv_grid") {
    cv_grid = flag(key, value);
  } else if (key == "cv_betas") {
    cv_betas = reals(key, value);
  } else if (key == "cv_alphas") {
    cv_alphas = reals(key, value);
  } else if (key == "model_out") {
    model_out = value;
  } else if (key == "threads") {
    threads = static_cast<unsigned>(positive(key, value));
  } else if (key == "out") {
    out = value;
  } else {
    throw ParseError("config: unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  for (const auto& r : parse_records(text, "config")) {
    try {
      cfg.set(r.key, r.value);
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(r.line) + ": " + e.what());
    }
  }
  return cfg;
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "task = " << c.task << '\n';
  os << "seed = " << c.seed << '\n';
  for (const auto& k : c.kernels) os << "kernel = " << k << '\n';
  if (!c.dataset.empty()) {
    os << "dataset = " << c.dataset << '\n';
  } else {
    os << "d = " << c.d << "\np = " << c.p << "\nclasses = " << c.classes << "\nper_class = " << c.per_class
       << "\nnoise_angle = " << format_shortest(c.noise_angle) << "\northogonal = " << (c.orthogonal ? "true" : "false")
       << '\n';
  }
  os << "splits = " << c.splits << '\n';
  os << "train_fraction = " << format_shortest(c.train_fraction) << '\n';
  os << "C = " << format_shortest(c.C) << '\n';
  os << "k = " << c.k << '\n';
  os << "restarts = " << c.restarts << '\n';
  os << "bits = " << join(c.bits) << '\n';
  os << "anchors = " << c.anchors << '\n';
  os << "top_m = " << c.top_m << '\n';
  os << "lambda = " << format_shortest(c.lambda) << '\n';
  os << "cv_grid = " << (c.cv_grid ? "true" : "false") << '\n';
  os << "cv_betas = " << join(c.cv_betas) << '\n';
  os << "cv_alphas = " << join(c.cv_alphas) << '\n';
  if (!c.model_out.empty()) os << "model_out = " << c.model_out << '\n';
  return os.str();
}

}  // namespace grasskern::harness
