// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "bdc/elicit.hpp"
#include "bdc/io.hpp"
#include "bdc/mcmc.hpp"
#include "bdc/metrics.hpp"
#include "bdc/summarize.hpp"
#include "bdc/synth.hpp"
#include "json.hpp"

namespace bdc {

namespace {

using nlohmann::json;

std::string chain_path(const std::string& out, int chain, int chains) {
  if (chains == 1) return out;
  const std::filesystem::path p(out);
  const std::string stem = (p.parent_path() / p.stem()).string();
  return stem + ".chain" + std::to_string(chain) + p.extension().string();
}

DissimilarityMatrix load_distances(const std::string& path, bool clamp_zero) {
  ValidateOptions opts;
  opts.clamp_zero = clamp_zero;
  return validate_dissimilarity(io::read_csv(path), opts);
}

struct GenerateArgs {
  SyntheticSettings s;
  std::string out, labels_out;
};

struct DistancesArgs {
  std::string in, out;
  bool squared = false;
  bool clamp_zero = false;
};

struct ElicitArgs {
  std::string dist, data, out;
  int kmax = 30;
  std::uint64_t seed = 1;
  bool clamp_zero = false;
  int warmup = 500;
  int draws = 2000;
};

struct RunArgs {
  std::string dist, params, out;
  MCMCOptions options;
  bool no_repulsion = false;
  bool prior_only = false;
  std::optional<double> fix_r, fix_p;
  bool clamp_zero = false;
  std::string p_update = "exact";
};

struct SummarizeArgs {
  std::string chain, loss = "vi", out, coclust_out, labels_out;
  int max_draws = 2000;
};

struct EvaluateArgs {
  std::string pred, truth, out;
};

void cmd_generate(const GenerateArgs& a) {
  const SyntheticDataset ds = generate_gaussian_mixture(a.s);
  io::write_data(a.out, ds.data);
  if (!a.labels_out.empty()) io::write_labels(a.labels_out, ds.truth);
}

void cmd_distances(const DistancesArgs& a) {
  ValidateOptions opts;
  opts.clamp_zero = a.clamp_zero;
  io::write_matrix(a.out, euclidean_distances(io::read_data(a.in), a.squared, opts));
}

void cmd_elicit(const ElicitArgs& a) {
  const DissimilarityMatrix d = load_distances(a.dist, a.clamp_zero);
  std::optional<DataMatrix> data;
  if (!a.data.empty()) data = io::read_data(a.data);
  ElicitOptions opts;
  opts.k_max = a.kmax;
  opts.seed = a.seed;
  opts.prior.warmup = a.warmup;
  opts.prior.draws = a.draws;
  const ElicitationReport report = elicit(d, data ? &*data : nullptr, opts);
  io::write_params(a.out, report);
}

void cmd_run(const RunArgs& a) {
  const DissimilarityMatrix d = load_distances(a.dist, a.clamp_zero);
  io::RunParams params;
  if (!a.params.empty()) params = io::read_params(a.params);
  if (a.no_repulsion) params.model.repulsion = false;
  if (a.p_update != "exact" && a.p_update != "gibbs") {
    throw ValidationError("run: --p-update must be exact or gibbs");
  }
  SamplerConfig config;
  config.options = a.options;
  config.prior_only = a.prior_only;
  config.fix_r = a.fix_r;
  config.fix_p = a.fix_p;
  config.conditioning = a.p_update == "exact" ? PriorConditioning::Conditional : PriorConditioning::Joint;
  config.options.validate();

  Partition init = Partition::singletons(d.size());
  if (params.initial_labels) {
    if (params.initial_labels->size() != d.size()) {
      throw ValidationError("run: initial_labels in the params file do not match the matrix size");
    }
    init = *params.initial_labels;
  }

  const std::vector<SampleChain> chains = run_chains(d, params.model, params.prior, config, init);
  json meta;
  meta["model"] = {{"delta1", params.model.delta1}, {"delta2", params.model.delta2},
                   {"alpha", params.model.alpha},   {"beta", params.model.beta},
                   {"zeta", params.model.zeta},     {"gamma", params.model.gamma},
                   {"repulsion", params.model.repulsion}};
  meta["prior"] = {{"eta", params.prior.eta}, {"sigma", params.prior.sigma},
                   {"u", params.prior.u},     {"v", params.prior.v}};
  meta["prior_only"] = a.prior_only;
  meta["fix_r"] = a.fix_r ? json(*a.fix_r) : json(nullptr);
  meta["fix_p"] = a.fix_p ? json(*a.fix_p) : json(nullptr);
  meta["p_update"] = a.p_update;
  for (int c = 0; c < static_cast<int>(chains.size()); ++c) {
    json chain_meta = meta;
    chain_meta["chain"] = c;
    io::write_chain(chain_path(a.out, c, static_cast<int>(chains.size())), chains[c], chain_meta.dump());
  }
}

void cmd_summarize(const SummarizeArgs& a) {
  Loss loss;
  if (a.loss == "vi") loss = Loss::VI;
  else if (a.loss == "binder") loss = Loss::Binder;
  else throw ValidationError("summarize: --loss must be vi or binder");
  const SampleChain chain = io::read_chain(a.chain);
  if (chain.records.empty()) throw ValidationError("summarize: chain has no draws");
  const PosteriorSummary s = summarize_chain(chain, loss, a.max_draws);

  json j;
  j["n"] = chain.n;
  j["draws"] = s.draws;
  json hist = json::object();
  int mode = 1;
  for (std::size_t k = 1; k < s.k_histogram.size(); ++k) {
    if (s.k_histogram[k] > 0.0) hist[std::to_string(k)] = s.k_histogram[k];
    if (s.k_histogram[k] > s.k_histogram[mode]) mode = static_cast<int>(k);
  }
  j["k_histogram"] = hist;
  j["k_mode"] = mode;
  j["point_estimate"] = {{"loss", a.loss},
                         {"labels", s.estimate.partition.one_based()},
                         {"K", s.estimate.partition.num_clusters()},
                         {"expected_loss", s.estimate.expected_loss},
                         {"best_sampled_loss", s.estimate.best_sampled_loss},
                         {"candidates", s.estimate.candidates},
                         {"refinement_sweeps", s.estimate.refinement_sweeps}};
  j["ess"] = {{"K", s.ess_k}, {"logpost", s.ess_logpost}};
  const AcceptanceCounters& c = chain.acceptance;
  j["acceptance"] = {{"split", AcceptanceCounters::rate(c.split_accepted, c.split_proposed)},
                     {"merge", AcceptanceCounters::rate(c.merge_accepted, c.merge_proposed)},
                     {"r", AcceptanceCounters::rate(c.r_accepted, c.r_proposed)},
                     {"p", AcceptanceCounters::rate(c.p_accepted, c.p_proposed)}};
  io::write_text(a.out, j.dump(2) + "\n");
  if (!a.coclust_out.empty()) io::write_coclustering(a.coclust_out, s.coclustering);
  if (!a.labels_out.empty()) io::write_labels(a.labels_out, s.estimate.partition);
}

void cmd_evaluate(const EvaluateArgs& a) {
  const Partition pred = io::read_labels(a.pred);
  const Partition truth = io::read_labels(a.truth);
  if (pred.size() != truth.size()) {
    throw ValidationError("evaluate: length mismatch (pred has " + std::to_string(pred.size()) +
                          " labels, truth has " + std::to_string(truth.size()) + ")");
  }
  json j;
  j["binder"] = binder_loss(pred, truth);
  j["vi"] = vi_distance(pred, truth);
  j["nvi"] = pred.size() >= 2 ? json(vi_distance(pred, truth, true)) : json(nullptr);
  j["ari"] = ari(pred, truth);
  j["nmi"] = nmi(pred, truth);
  j["K_pred"] = pred.num_clusters();
  j["K_truth"] = truth.num_clusters();
  j["conventions"] = {{"binder", "disagreeing pairs / C(n,2)"},
                      {"vi", "nats"},
                      {"nvi", "vi / log(n)"},
                      {"nmi", "I / sqrt(H_pred * H_truth)"}};
  io::write_text(a.out, j.dump(2) + "\n");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Bayesian distance clustering"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Simulate a Gaussian mixture");
  g->add_option("--n", gen.s.n, "Number of observations")->required();
  g->add_option("--dim", gen.s.dim, "Dimension")->required();
  g->add_option("--k", gen.s.k, "Number of clusters")->required();
  g->add_option("--sep", gen.s.separation, "Center radius in units of sigma*sqrt(dim)");
  g->add_option("--sigma", gen.s.sigma, "Within-cluster standard deviation");
  g->add_option("--seed", gen.s.seed, "Random seed");
  g->add_option("--out", gen.out, "Data CSV")->required();
  g->add_option("--labels-out", gen.labels_out, "True labels CSV");

  DistancesArgs dist;
  auto* ds = app.add_subcommand("distances", "Pairwise Euclidean distances");
  ds->add_option("--in", dist.in, "Data CSV")->required();
  ds->add_flag("--squared", dist.squared, "Squared distances");
  ds->add_flag("--clamp-zero", dist.clamp_zero, "Clamp zero distances instead of failing");
  ds->add_option("--out", dist.out, "Distance CSV")->required();

  ElicitArgs el;
  auto* e = app.add_subcommand("elicit", "Choose hyperparameters from the data");
  e->add_option("--dist", el.dist, "Distance CSV")->required();
  e->add_option("--kmax", el.kmax, "Largest K on the elbow curve");
  e->add_option("--seed", el.seed, "Random seed");
  e->add_option("--out", el.out, "Params JSON")->required();
  e->add_option("--data", el.data, "Raw data CSV (enables k-means)");
  e->add_flag("--clamp-zero", el.clamp_zero, "Clamp zero distances instead of failing");
  e->add_option("--warmup", el.warmup, "Warm-up updates for the r/p fit");
  e->add_option("--draws", el.draws, "Retained updates for the r/p fit");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Sample the posterior");
  r->add_option("--dist", run.dist, "Distance CSV")->required();
  r->add_option("--params", run.params, "Params JSON from elicit");
  r->add_option("--iters", run.options.iterations, "Iterations");
  r->add_option("--burnin", run.options.burnin, "Burn-in iterations");
  r->add_option("--thin", run.options.thin, "Thinning interval");
  r->add_option("--seed", run.options.seed, "Random seed");
  r->add_option("--chains", run.options.chains, "Independent chains");
  r->add_option("--sm-scans", run.options.split_merge_scans, "Restricted Gibbs scans per split-merge");
  r->add_flag("--no-repulsion", run.no_repulsion, "Drop the cross-cluster term");
  r->add_flag("--prior-only", run.prior_only, "Ignore the likelihood");
  r->add_option("--fix-r", run.fix_r, "Hold r fixed");
  r->add_option("--fix-p", run.fix_p, "Hold p fixed");
  r->add_flag("--clamp-zero", run.clamp_zero, "Clamp zero distances instead of failing");
  r->add_option("--p-update", run.p_update, "exact (P(E_n)-corrected) or gibbs");
  r->add_option("--out", run.out, "Chain JSONL")->required();

  SummarizeArgs sum;
  auto* s = app.add_subcommand("summarize", "Summarize a chain");
  s->add_option("--chain", sum.chain, "Chain JSONL")->required();
  s->add_option("--loss", sum.loss, "vi or binder");
  s->add_option("--out", sum.out, "Summary JSON")->required();
  s->add_option("--coclust-out", sum.coclust_out, "Co-clustering CSV");
  s->add_option("--labels-out", sum.labels_out, "Point estimate labels CSV");
  s->add_option("--max-draws", sum.max_draws, "Draws used for the VI loss");

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Compare two labelings");
  v->add_option("--pred", ev.pred, "Predicted labels CSV")->required();
  v->add_option("--truth", ev.truth, "True labels CSV")->required();
  v->add_option("--out", ev.out, "Metrics JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }

  try {
    if (g->parsed()) cmd_generate(gen);
    else if (ds->parsed()) cmd_distances(dist);
    else if (e->parsed()) cmd_elicit(el);
    else if (r->parsed()) cmd_run(run);
    else if (s->parsed()) cmd_summarize(sum);
    else if (v->parsed()) cmd_evaluate(ev);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace bdc
