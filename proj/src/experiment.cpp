#include "grasskern/harness/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

#include "grasskern/error.hpp"
#include "grasskern/format.hpp"
#include "grasskern/machines/kkmeans.hpp"
#include "grasskern/machines/klsh.hpp"
#include "grasskern/machines/metrics.hpp"
#include "grasskern/machines/sparse_coding.hpp"
#include "grasskern/machines/svm.hpp"
#include "grasskern/model_io.hpp"
#include "grasskern/parallel.hpp"

namespace grasskern::harness {

using json = nlohmann::ordered_json;
namespace m = grasskern::machines;

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Dataset load_or_generate(const ExperimentConfig& cfg) {
  if (!cfg.dataset.empty()) return parse_dataset(read_text_file(cfg.dataset));
  PlantedOptions o;
  o.d = cfg.d;
  o.p = cfg.p;
  o.classes = cfg.classes;
  o.per_class = cfg.per_class;
  o.noise_angle = cfg.noise_angle;
  o.seed = cfg.seed;
  o.orthogonal_prototypes = cfg.orthogonal;
  return generate_planted(o);
}

std::vector<KernelSpec> resolve_kernels(const ExperimentConfig& cfg, Eigen::Index p, std::string_view task) {
  std::vector<KernelSpec> out;
  for (const auto& r : cfg.kernels) out.push_back(KernelSpec::parse_record(r, p));
  if (!out.empty()) return out;
  if (task == "pd-check" || task == "gram") return table_kernels(p);
  out.push_back(KernelSpec::make(Embedding::projection, Family::rbf, p, 1.0, 1.0));
  out.push_back(KernelSpec::make(Embedding::projection, Family::polynomial, p, 2.0, 1.0));
  out.push_back(KernelSpec::make(Embedding::projection, Family::laplace, p, 1.0, 1.0));
  return out;
}

namespace {

std::string fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) l += "  ";
      l += cells[c];
      if (c + 1 < cells.size()) l.append(width[c] - cells[c].size(), ' ');
    }
    out += l + '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& r : rows) line(r);
  return out;
}

json config_json(const ExperimentConfig& cfg) {
  json out = json::object();
  for (const auto& r : parse_records(config_to_text(cfg), "config")) {
    if (r.key == "kernel") {
      out["kernel"].push_back(r.value);
    } else {
      out[r.key] = r.value;
    }
  }
  return out;
}

Matrix block(const Matrix& k, const std::vector<int>& rows, const std::vector<int>& cols) { return k(rows, cols); }

std::vector<int> pick(const std::vector<int>& from, const std::vector<int>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(from[static_cast<std::size_t>(i)]);
  return out;
}

struct Context {
  const ExperimentConfig& cfg;
  const Dataset& data;
  std::vector<Split> splits;
  std::vector<int> classes;
};

std::vector<Split> make_splits(const ExperimentConfig& cfg, const Dataset& data) {
  std::vector<Split> out;
  for (int s = 0; s < cfg.splits; ++s)
    out.push_back(stratified_split(data.labels, cfg.train_fraction, derive_seed({cfg.seed, 1, static_cast<std::uint64_t>(s)})));
  return out;
}

json splits_json(const Context& ctx) {
  json out = json::array();
  for (std::size_t s = 0; s < ctx.splits.size(); ++s)
    out.push_back({{"index", s}, {"train", ctx.splits[s].train}, {"test", ctx.splits[s].test}});
  return out;
}

void require_labels(const Dataset& data, std::string_view task) {
  if (!data.has_labels()) throw DegenerateLabels(std::string(task) + " needs a labeled dataset");
  if (data.classes().size() < 2) throw DegenerateLabels(std::string(task) + " needs at least two classes");
}

struct Section {
  json results = json::array();
  std::string table;
  bool all_passed = true;
};

// A Gram per kernel over the whole dataset; the error text instead when
// the kernel cannot be evaluated.
struct KernelGrams {
  std::vector<KernelSpec> specs;
  std::vector<std::optional<GramMatrix>> grams;
  std::vector<std::string> errors;
};

KernelGrams compute_grams(const std::vector<KernelSpec>& specs, const Dataset& data, unsigned threads) {
  KernelGrams out{specs, {}, {}};
  for (const auto& s : specs) {
    try {
      out.grams.emplace_back(gram(s, data.subspaces, threads));
      out.errors.emplace_back();
    } catch (const Error& e) {
      out.grams.emplace_back(std::nullopt);
      out.errors.emplace_back(e.what());
    }
  }
  return out;
}

json kernel_head(const KernelSpec& s) { return {{"kernel", s.name()}, {"record", s.to_record()}}; }

// ---------------------------------------------------------------- pd-check

Section pd_check_section(const Context& ctx, const std::vector<KernelSpec>& specs) {
  Section sec;
  std::vector<std::vector<std::string>> rows;
  const auto grams = compute_grams(specs, ctx.data, ctx.cfg.threads);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    json row = kernel_head(specs[i]);
    if (!grams.grams[i]) {
      row["error"] = grams.errors[i];
      sec.all_passed = false;
      rows.push_back({specs[i].name(), "error", "", "", grams.errors[i]});
    } else {
      const auto rep = certify_pd(*grams.grams[i], specs[i].definiteness());
      row["mode"] = to_string(rep.mode);
      row["min_eigenvalue"] = rep.min_eigenvalue;
      row["max_eigenvalue"] = rep.max_eigenvalue;
      row["tolerance"] = rep.tolerance;
      row["passed"] = rep.passed;
      sec.all_passed = sec.all_passed && rep.passed;
      rows.push_back({specs[i].name(), std::string(to_string(rep.mode)), sci(rep.min_eigenvalue),
                      sci(rep.max_eigenvalue), rep.passed ? "pass" : "FAIL"});
    }
    sec.results.push_back(std::move(row));
  }
  sec.table = render_table({"kernel", "mode", "min_eig", "max_eig", "result"}, rows);
  return sec;
}

// --------------------------------------------------------------------- svm

struct SvmOutcome {
  std::vector<int> predictions;
  bool converged = true;
  double max_kkt = 0.0;
  std::size_t iterations = 0;
};

// One-vs-rest over `classes` (a single machine for two classes, classes[0]
// positive). Highest decision value wins, lowest class on ties.
SvmOutcome svm_classify(const Matrix& k, const std::vector<int>& labels, const std::vector<int>& classes,
                        const std::vector<int>& train, const std::vector<int>& test, double C, const KernelSpec& spec) {
  const GramMatrix g{block(k, train, train), spec, {}};
  const Matrix cross = block(k, test, train);
  const std::size_t machines = classes.size() == 2 ? 1 : classes.size();
  SvmOutcome out;
  Matrix decision(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(machines));
  for (std::size_t c = 0; c < machines; ++c) {
    std::vector<int> y;
    for (int t : train) y.push_back(labels[static_cast<std::size_t>(t)] == classes[c] ? 1 : -1);
    const auto model = m::svm_train(g, y, C);
    out.converged = out.converged && model.converged;
    out.max_kkt = std::max(out.max_kkt, model.kkt_residual);
    out.iterations += model.iterations;
    for (std::size_t q = 0; q < test.size(); ++q)
      decision(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c)) =
          m::svm_predict_from_row(model, cross.row(static_cast<Eigen::Index>(q)).transpose()).decision_value;
  }
  for (Eigen::Index q = 0; q < decision.rows(); ++q) {
    if (machines == 1) {
      out.predictions.push_back(decision(q, 0) >= 0.0 ? classes[0] : classes[1]);
    } else {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < decision.cols(); ++c)
        if (decision(q, c) > decision(q, best)) best = c;
      out.predictions.push_back(classes[static_cast<std::size_t>(best)]);
    }
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(predicted.size());
}

bool has_beta(const KernelSpec& s) {
  return s.family() == Family::polynomial || s.family() == Family::rbf || s.family() == Family::laplace ||
         s.family() == Family::binomial;
}

std::vector<KernelSpec> cv_candidates(const ExperimentConfig& cfg, const KernelSpec& base) {
  std::vector<KernelSpec> out;
  const bool uses_alpha = base.family() == Family::polynomial || base.family() == Family::binomial;
  const std::vector<double> alphas = uses_alpha ? cfg.cv_alphas : std::vector<double>{base.alpha()};
  for (double a : alphas) {
    for (double b : cfg.cv_betas) {
      try {
        out.push_back(KernelSpec::make(base.embedding(), base.family(), base.subspace_dim(), a, b));
      } catch (const InvalidKernelParameter&) {
        // grid point outside this family's parameter range
      }
    }
  }
  if (out.empty()) out.push_back(base);
  return out;
}

// Stratified 2-fold inner validation on the training indices; best mean
// accuracy wins, earliest grid point on ties.
std::pair<KernelSpec, double> cv_select(const Context& ctx, const KernelSpec& base, const std::vector<int>& train,
                                        std::size_t split) {
  const auto train_labels = pick(ctx.data.labels, train);
  const auto inner = stratified_split(train_labels, 0.5, derive_seed({ctx.cfg.seed, 5, split}));
  const auto fold_a = pick(train, inner.train);
  const auto fold_b = pick(train, inner.test);
  KernelSpec best = base;
  double best_score = -1.0;
  for (const auto& cand : cv_candidates(ctx.cfg, base)) {
    double score = 0.0;
    try {
      const Matrix k = gram(cand, ctx.data.subspaces).values;
      for (int fold = 0; fold < 2; ++fold) {
        const auto& tr = fold == 0 ? fold_a : fold_b;
        const auto& va = fold == 0 ? fold_b : fold_a;
        const auto out = svm_classify(k, ctx.data.labels, ctx.classes, tr, va, ctx.cfg.C, cand);
        score += 0.5 * accuracy(out.predictions, pick(ctx.data.labels, va));
      }
    } catch (const Error&) {
      score = -1.0;
    }
    if (score > best_score) {
      best_score = score;
      best = cand;
    }
  }
  return {best, best_score};
}

Section svm_section(const Context& ctx, const std::vector<KernelSpec>& specs) {
  Section sec;
  const auto grams = compute_grams(specs, ctx.data, ctx.cfg.threads);
  const std::size_t ns = ctx.splits.size();
  std::vector<json> cells(specs.size() * ns);
  parallel_for(cells.size(), ctx.cfg.threads, [&](std::size_t cell) {
    const std::size_t i = cell / ns, s = cell % ns;
    if (!grams.grams[i]) return;
    json c = {{"split", s}};
    try {
      const auto& sp = ctx.splits[s];
      KernelSpec chosen = specs[i];
      Matrix k = grams.grams[i]->values;
      if (ctx.cfg.cv_grid && has_beta(specs[i])) {
        const auto [spec, score] = cv_select(ctx, specs[i], sp.train, s);
        chosen = spec;
        c["cv_record"] = chosen.to_record();
        c["cv_score"] = score;
        if (!(chosen == specs[i])) k = gram(chosen, ctx.data.subspaces).values;
      }
      const auto out = svm_classify(k, ctx.data.labels, ctx.classes, sp.train, sp.test, ctx.cfg.C, chosen);
      c["accuracy"] = accuracy(out.predictions, pick(ctx.data.labels, sp.test));
      c["converged"] = out.converged;
      c["max_kkt_residual"] = out.max_kkt;
      c["iterations"] = out.iterations;
    } catch (const Error& e) {
      c["error"] = e.what();
    }
    cells[cell] = std::move(c);
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    json row = kernel_head(specs[i]);
    if (!grams.grams[i]) {
      row["error"] = grams.errors[i];
      rows.push_back({specs[i].name(), "error", grams.errors[i]});
      sec.results.push_back(std::move(row));
      continue;
    }
    std::vector<double> acc;
    std::string err;
    json per = json::array();
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& c = cells[i * ns + s];
      if (c.contains("error") && err.empty()) err = c["error"].get<std::string>();
      if (c.contains("accuracy")) acc.push_back(c["accuracy"].get<double>());
      per.push_back(c);
    }
    if (!err.empty()) {
      row["error"] = err;
      rows.push_back({specs[i].name(), "error", err});
    } else {
      row["mean_accuracy"] = mean_of(acc);
      row["std_accuracy"] = std_of(acc);
      rows.push_back({specs[i].name(), fixed(mean_of(acc)) + " +/- " + fixed(std_of(acc)), ""});
    }
    row["splits"] = std::move(per);
    sec.results.push_back(std::move(row));
  }
  sec.table = render_table({"kernel", "test accuracy", "note"}, rows);
  return sec;
}

// ----------------------------------------------------------------- cluster

Section cluster_section(const Context& ctx, const std::vector<KernelSpec>& specs) {
  Section sec;
  const auto grams = compute_grams(specs, ctx.data, ctx.cfg.threads);
  const int k = ctx.cfg.k > 0 ? ctx.cfg.k : static_cast<int>(ctx.classes.size());
  const std::size_t ns = static_cast<std::size_t>(ctx.cfg.splits);
  std::vector<json> cells(specs.size() * ns);
  parallel_for(cells.size(), ctx.cfg.threads, [&](std::size_t cell) {
    const std::size_t i = cell / ns, s = cell % ns;
    if (!grams.grams[i]) return;
    json c = {{"run", s}};
    try {
      const auto a = m::kkmeans(*grams.grams[i], k, derive_seed({ctx.cfg.seed, 2, s}), ctx.cfg.restarts);
      bool monotone = true;
      for (std::size_t t = 1; t < a.inertia_history.size(); ++t)
        monotone = monotone && a.inertia_history[t] <= a.inertia_history[t - 1];
      c["nmi"] = m::nmi(a.labels, ctx.data.labels);
      c["accuracy"] = m::clustering_accuracy(a.labels, ctx.data.labels);
      c["inertia"] = a.inertia;
      c["iterations"] = a.iterations;
      c["monotone"] = monotone;
    } catch (const Error& e) {
      c["error"] = e.what();
    }
    cells[cell] = std::move(c);
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    json row = kernel_head(specs[i]);
    if (!grams.grams[i]) {
      row["error"] = grams.errors[i];
      rows.push_back({specs[i].name(), "error", "", grams.errors[i]});
      sec.results.push_back(std::move(row));
      continue;
    }
    std::vector<double> nmis, accs;
    std::string err;
    json per = json::array();
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& c = cells[i * ns + s];
      if (c.contains("error") && err.empty()) err = c["error"].get<std::string>();
      if (c.contains("nmi")) {
        nmis.push_back(c["nmi"].get<double>());
        accs.push_back(c["accuracy"].get<double>());
      }
      per.push_back(c);
    }
    if (!err.empty()) {
      row["error"] = err;
      rows.push_back({specs[i].name(), "error", "", err});
    } else {
      row["k"] = k;
      row["mean_nmi"] = mean_of(nmis);
      row["std_nmi"] = std_of(nmis);
      row["mean_accuracy"] = mean_of(accs);
      row["std_accuracy"] = std_of(accs);
      rows.push_back({specs[i].name(), fixed(mean_of(nmis)) + " +/- " + fixed(std_of(nmis)),
                      fixed(mean_of(accs)) + " +/- " + fixed(std_of(accs)), ""});
    }
    row["runs"] = std::move(per);
    sec.results.push_back(std::move(row));
  }
  sec.table = render_table({"kernel", "nmi", "accuracy", "note"}, rows);
  return sec;
}

// -------------------------------------------------------------------- hash

int vote(const std::vector<int>& retrieved, const std::vector<int>& labels) {
  std::map<int, int> count;
  for (int r : retrieved) ++count[labels[static_cast<std::size_t>(r)]];
  int best_count = 0;
  for (const auto& [_, c] : count) best_count = std::max(best_count, c);
  for (int r : retrieved)
    if (count[labels[static_cast<std::size_t>(r)]] == best_count) return labels[static_cast<std::size_t>(r)];
  return labels.front();
}

std::vector<int> exact_ranking(const Matrix& k, int q, const std::vector<int>& db, int top) {
  std::vector<std::pair<double, int>> d;
  for (std::size_t j = 0; j < db.size(); ++j)
    d.emplace_back(k(q, q) + k(db[j], db[j]) - 2.0 * k(q, db[j]), static_cast<int>(j));
  std::sort(d.begin(), d.end());
  std::vector<int> out;
  for (int i = 0; i < top && i < static_cast<int>(d.size()); ++i) out.push_back(d[static_cast<std::size_t>(i)].second);
  return out;
}

Section hash_section(const Context& ctx, const std::vector<KernelSpec>& specs) {
  Section sec;
  const auto grams = compute_grams(specs, ctx.data, ctx.cfg.threads);
  const std::size_t ns = ctx.splits.size(), nb = ctx.cfg.bits.size();
  std::vector<json> cells(specs.size() * ns * nb);
  parallel_for(cells.size(), ctx.cfg.threads, [&](std::size_t cell) {
    const std::size_t i = cell / (ns * nb), s = (cell / nb) % ns, bi = cell % nb;
    if (!grams.grams[i]) return;
    const int bits = ctx.cfg.bits[bi];
    json c = {{"split", s}, {"bits", bits}};
    try {
      const auto& sp = ctx.splits[s];
      const Matrix& k = grams.grams[i]->values;
      const GramMatrix train{block(k, sp.train, sp.train), specs[i], {}};
      const int t = std::min(ctx.cfg.anchors, static_cast<int>(sp.train.size()));
      const auto fam = m::klsh_build(train, bits, t, derive_seed({ctx.cfg.seed, 3, s, static_cast<std::uint64_t>(bits)}));
      const auto db = m::klsh_hash_training(fam, train);
      const auto train_labels = pick(ctx.data.labels, sp.train);
      const int top = std::min(ctx.cfg.top_m, static_cast<int>(sp.train.size()));
      std::size_t hits = 0;
      double recall = 0.0;
      for (int q : sp.test) {
        const Vector row = block(k, {q}, sp.train).row(0).transpose();
        const auto found = m::klsh_query(fam, db, m::klsh_hash_row(fam, row), top);
        hits += vote(found, train_labels) == ctx.data.labels[static_cast<std::size_t>(q)];
        auto exact = exact_ranking(k, q, sp.train, top);
        std::sort(exact.begin(), exact.end());
        auto got = found;
        std::sort(got.begin(), got.end());
        std::vector<int> both;
        std::set_intersection(got.begin(), got.end(), exact.begin(), exact.end(), std::back_inserter(both));
        recall += static_cast<double>(both.size()) / top;
      }
      c["anchors"] = t;
      c["accuracy"] = sp.test.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(sp.test.size());
      c["recall"] = sp.test.empty() ? 0.0 : recall / static_cast<double>(sp.test.size());
    } catch (const Error& e) {
      c["error"] = e.what();
    }
    cells[cell] = std::move(c);
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    json row = kernel_head(specs[i]);
    if (!grams.grams[i]) {
      row["error"] = grams.errors[i];
      rows.push_back({specs[i].name(), "", "error", "", grams.errors[i]});
      sec.results.push_back(std::move(row));
      continue;
    }
    json by_bits = json::array();
    for (std::size_t bi = 0; bi < nb; ++bi) {
      std::vector<double> acc, rec;
      std::string err;
      json per = json::array();
      for (std::size_t s = 0; s < ns; ++s) {
        const auto& c = cells[(i * ns + s) * nb + bi];
        if (c.contains("error") && err.empty()) err = c["error"].get<std::string>();
        if (c.contains("accuracy")) {
          acc.push_back(c["accuracy"].get<double>());
          rec.push_back(c["recall"].get<double>());
        }
        per.push_back(c);
      }
      json b = {{"bits", ctx.cfg.bits[bi]}};
      const auto bits_text = std::to_string(ctx.cfg.bits[bi]);
      if (!err.empty()) {
        b["error"] = err;
        rows.push_back({specs[i].name(), bits_text, "error", "", err});
      } else {
        b["mean_accuracy"] = mean_of(acc);
        b["std_accuracy"] = std_of(acc);
        b["mean_recall"] = mean_of(rec);
        rows.push_back({specs[i].name(), bits_text, fixed(mean_of(acc)) + " +/- " + fixed(std_of(acc)),
                        fixed(mean_of(rec)), ""});
      }
      b["splits"] = std::move(per);
      by_bits.push_back(std::move(b));
    }
    row["top_m"] = ctx.cfg.top_m;
    row["bits"] = std::move(by_bits);
    sec.results.push_back(std::move(row));
  }
  sec.table = render_table({"kernel", "bits", "accuracy", "recall@" + std::to_string(ctx.cfg.top_m), "note"}, rows);
  return sec;
}

// ------------------------------------------------------------- sparse-code

Section sparse_section(const Context& ctx, const std::vector<KernelSpec>& specs) {
  Section sec;
  const auto grams = compute_grams(specs, ctx.data, ctx.cfg.threads);
  const std::size_t ns = ctx.splits.size();
  std::vector<json> cells(specs.size() * ns);
  parallel_for(cells.size(), ctx.cfg.threads, [&](std::size_t cell) {
    const std::size_t i = cell / ns, s = cell % ns;
    if (!grams.grams[i]) return;
    json c = {{"split", s}};
    try {
      const auto& sp = ctx.splits[s];
      const Matrix& k = grams.grams[i]->values;
      const Matrix dict = block(k, sp.train, sp.train);
      const auto rep = certify_pd(dict, Definiteness::pd);
      if (!rep.passed)
        throw NotPositiveSemidefinite("dictionary Gram has eigenvalue " + format_shortest(rep.min_eigenvalue));
      const auto atom_labels = pick(ctx.data.labels, sp.train);
      m::SparseCodingOptions opt;
      opt.check_dictionary = false;
      std::size_t hits = 0, fallbacks = 0, sweeps = 0;
      bool converged = true;
      for (int q : sp.test) {
        const Vector col = block(k, sp.train, {q}).col(0);
        const auto code = m::kernel_sparse_code(dict, col, k(q, q), ctx.cfg.lambda, opt);
        converged = converged && code.converged;
        sweeps = std::max(sweeps, code.sweeps);
        int label = 0;
        try {
          label = m::sparse_code_classify(code, atom_labels);
        } catch (const ZeroCode&) {
          Eigen::Index best = 0;
          col.maxCoeff(&best);
          label = atom_labels[static_cast<std::size_t>(best)];
          ++fallbacks;
        }
        hits += label == ctx.data.labels[static_cast<std::size_t>(q)];
      }
      c["accuracy"] = sp.test.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(sp.test.size());
      c["zero_code_fallbacks"] = fallbacks;
      c["max_sweeps"] = sweeps;
      c["converged"] = converged;
    } catch (const Error& e) {
      c["error"] = e.what();
    }
    cells[cell] = std::move(c);
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    json row = kernel_head(specs[i]);
    if (!grams.grams[i]) {
      row["error"] = grams.errors[i];
      rows.push_back({specs[i].name(), "error", grams.errors[i]});
      sec.results.push_back(std::move(row));
      continue;
    }
    std::vector<double> acc;
    std::string err;
    json per = json::array();
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& c = cells[i * ns + s];
      if (c.contains("error") && err.empty()) err = c["error"].get<std::string>();
      if (c.contains("accuracy")) acc.push_back(c["accuracy"].get<double>());
      per.push_back(c);
    }
    if (!err.empty()) {
      row["error"] = err;
      rows.push_back({specs[i].name(), "error", err});
    } else {
      row["lambda"] = ctx.cfg.lambda;
      row["mean_accuracy"] = mean_of(acc);
      row["std_accuracy"] = std_of(acc);
      rows.push_back({specs[i].name(), fixed(mean_of(acc)) + " +/- " + fixed(std_of(acc)), ""});
    }
    row["splits"] = std::move(per);
    sec.results.push_back(std::move(row));
  }
  sec.table = render_table({"kernel", "test accuracy", "note"}, rows);
  return sec;
}

// ------------------------------------------------------------------- gram

Section gram_section(const Context& ctx, const std::vector<KernelSpec>& specs, Report& report) {
  Section sec;
  std::vector<std::vector<std::string>> rows;
  const auto grams = compute_grams(specs, ctx.data, ctx.cfg.threads);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    json row = kernel_head(specs[i]);
    if (!grams.grams[i]) {
      row["error"] = grams.errors[i];
      rows.push_back({specs[i].name(), "", "", "error: " + grams.errors[i]});
    } else {
      const auto& g = *grams.grams[i];
      const std::string suffix = "gram-" + std::to_string(i) + "-" + specs[i].name() + ".csv";
      report.attachments.emplace_back(suffix, gram_to_csv(g));
      row["n"] = g.size();
      row["fingerprint"] = g.dataset_fingerprint;
      row["min_entry"] = g.values.minCoeff();
      row["max_entry"] = g.values.maxCoeff();
      row["file_suffix"] = suffix;
      rows.push_back({specs[i].name(), sci(g.values.minCoeff()), sci(g.values.maxCoeff()), suffix});
    }
    sec.results.push_back(std::move(row));
  }
  sec.table = render_table({"kernel", "min", "max", "file"}, rows);
  return sec;
}

// ---------------------------------------------------------- counterexample

constexpr double kCounterexampleExpected = -0.0038;
constexpr double kCounterexampleTolerance = 5e-4;

Section counterexample_section() {
  Section sec;
  const auto pts = counterexample_points();
  Matrix k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      k(i, j) = geodesic_rbf_pseudo_kernel(1.0, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
  const Vector ev = numerics::symmetric_eigenvalues(k);
  const bool ok = std::abs(ev(0) - kCounterexampleExpected) <= kCounterexampleTolerance;
  json gram_rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json r = json::array();
    for (int j = 0; j < 4; ++j) r.push_back(k(i, j));
    gram_rows.push_back(std::move(r));
  }
  json eig = json::array();
  for (Eigen::Index i = 0; i < ev.size(); ++i) eig.push_back(ev(i));
  sec.results.push_back({{"kernel", "exp(-geodesic^2)"},
                         {"gram", std::move(gram_rows)},
                         {"eigenvalues", std::move(eig)},
                         {"min_eigenvalue", ev(0)},
                         {"expected", kCounterexampleExpected},
                         {"tolerance", kCounterexampleTolerance},
                         {"passed", ok}});
  sec.all_passed = ok;
  std::string t;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) t += (j ? "  " : "") + fixed(k(i, j), 6);
    t += '\n';
  }
  t += "eigenvalues:";
  for (Eigen::Index i = 0; i < ev.size(); ++i) t += ' ' + fixed(ev(i), 6);
  t += "\nmin eigenvalue " + fixed(ev(0), 6) + " (expected " + fixed(kCounterexampleExpected, 4) + " +/- " +
       format_shortest(kCounterexampleTolerance) + "): " + (ok ? "pass" : "FAIL") + '\n';
  sec.table = t;
  return sec;
}

json dataset_json(const Dataset& d) {
  return {{"name", d.name},   {"fingerprint", d.fingerprint()}, {"n", d.size()},
          {"d", d.ambient_dim()}, {"p", d.dim()},              {"classes", d.classes()}};
}

void write_models(const Context& ctx, const std::vector<KernelSpec>& specs, std::string_view task) {
  if (ctx.cfg.model_out.empty() || specs.empty() || ctx.splits.empty()) return;
  const auto& sp = ctx.splits.front();
  std::vector<Subspace> refs;
  for (int i : sp.train) refs.push_back(ctx.data.subspaces[static_cast<std::size_t>(i)]);
  const auto g = gram(specs.front(), refs, ctx.cfg.threads);
  if (task == "svm") {
    if (ctx.classes.size() != 2) throw InvalidArgument("model_out for svm needs a two-class dataset");
    std::vector<int> y;
    for (int i : sp.train) y.push_back(ctx.data.labels[static_cast<std::size_t>(i)] == ctx.classes[0] ? 1 : -1);
    write_text_file(ctx.cfg.model_out, serialize_svm(m::svm_train(g, y, ctx.cfg.C, refs)));
  } else if (task == "hash") {
    const int bits = *std::max_element(ctx.cfg.bits.begin(), ctx.cfg.bits.end());
    const int t = std::min(ctx.cfg.anchors, static_cast<int>(refs.size()));
    const auto fam = m::klsh_build(g, bits, t, derive_seed({ctx.cfg.seed, 3, 0, static_cast<std::uint64_t>(bits)}), refs);
    write_text_file(ctx.cfg.model_out, serialize_hash_family(fam));
    write_text_file(ctx.cfg.model_out + ".keys", serialize_hash_keys(m::klsh_hash_training(fam, g)));
  }
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg_in) {
  Report report;
  ExperimentConfig cfg = cfg_in;
  json doc;
  doc["format_version"] = 1;
  doc["library_version"] = std::string(kLibraryVersion);
  doc["task"] = cfg.task;

  if (cfg.task == "counterexample") {
    auto sec = counterexample_section();
    doc["config"] = config_json(cfg);
    doc["results"] = std::move(sec.results);
    report.table = "counterexample\n" + sec.table;
    report.exit_code = sec.all_passed ? 0 : 1;
    report.document = doc.dump(2) + "\n";
    return report;
  }

  const Dataset data = load_or_generate(cfg);
  data.validate();
  if (data.size() == 0) throw InsufficientData("dataset is empty");

  if (cfg.task == "generate") {
    report.document = serialize_dataset(data);
    report.table = "dataset " + data.name + ": n=" + std::to_string(data.size()) + " d=" +
                   std::to_string(data.ambient_dim()) + " p=" + std::to_string(data.dim()) +
                   " fingerprint=" + data.fingerprint() + "\n";
    return report;
  }

  Context ctx{cfg, data, {}, data.classes()};
  const auto p = data.dim();
  const bool labeled_task = cfg.task == "svm" || cfg.task == "cluster" || cfg.task == "hash" ||
                            cfg.task == "sparse-code" || cfg.task == "bench";
  if (labeled_task) require_labels(data, cfg.task);
  if (cfg.task == "svm" || cfg.task == "hash" || cfg.task == "sparse-code" || cfg.task == "bench")
    ctx.splits = make_splits(cfg, data);

  const auto run = [&](std::string_view task) -> Section {
    const auto specs = resolve_kernels(cfg, p, task);
    if (task == "pd-check") return pd_check_section(ctx, specs);
    if (task == "svm") return svm_section(ctx, specs);
    if (task == "cluster") return cluster_section(ctx, specs);
    if (task == "hash") return hash_section(ctx, specs);
    if (task == "sparse-code") return sparse_section(ctx, specs);
    return gram_section(ctx, specs, report);
  };

  if (cfg.task == "bench") {
    doc["config"] = config_json(cfg);
    doc["dataset"] = dataset_json(data);
    doc["splits"] = splits_json(ctx);
    json sections = json::object();
    std::string table;
    for (std::string_view t : {"pd-check", "svm", "cluster", "hash", "sparse-code"}) {
      auto sec = run(t);
      sections[std::string(t)] = std::move(sec.results);
      table += std::string(t) + "\n" + sec.table + "\n";
    }
    doc["sections"] = std::move(sections);
    report.table = std::move(table);
  } else {
    std::vector<std::string> resolved;
    for (const auto& s : resolve_kernels(cfg, p, cfg.task)) resolved.push_back(s.to_record());
    cfg.kernels = resolved;
    doc["config"] = config_json(cfg);
    doc["dataset"] = dataset_json(data);
    if (!ctx.splits.empty()) doc["splits"] = splits_json(ctx);
    auto sec = run(cfg.task);
    doc["results"] = std::move(sec.results);
    report.table = cfg.task + "\n" + sec.table;
    if (cfg.task == "pd-check" && !sec.all_passed) report.exit_code = 1;
    write_models(ctx, resolve_kernels(cfg, p, cfg.task), cfg.task);
  }
  report.document = doc.dump(2) + "\n";
  return report;
}

void write_report(const Report& report, const std::string& out) {
  write_text_file(out, report.document);
  write_text_file(out + ".txt", report.table);
  for (const auto& [suffix, content] : report.attachments) write_text_file(out + "." + suffix, content);
}

}  // namespace grasskern::harness
