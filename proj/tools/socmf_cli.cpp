// socmf: train, evaluate and sweep social-regularized matrix factorization
// models from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "socmf/baselines.hpp"
#include "socmf/error.hpp"
#include "socmf/evaluation.hpp"
#include "socmf/factorization.hpp"
#include "socmf/io.hpp"
#include "socmf/srn.hpp"

namespace {

using namespace socmf;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct Options {
  std::string ratings;
  std::string edges;
  std::string out;
  std::string trace;
  std::string model;
  std::string user;
  std::string scale = "1:5";
  std::string social_grad = "printed";
  bool symmetrize = false;
  Hyperparams hp;
  std::vector<std::size_t> k_values;
  std::vector<double> mu_values;
  double split_fraction = 0.8;
  std::uint64_t split_seed = 0;
  bool split_seed_set = false;
  unsigned threads = 0;
  std::size_t top = 10;
  bool no_clamp = false;
  SyntheticParams synth;
};

RatingScale parse_scale(const std::string& text) {
  const auto colon = text.find(':');
  RatingScale scale;
  if (colon == std::string::npos) throw ConfigError("--scale expects MIN:MAX, got '" + text + "'");
  auto parse = [&](std::string_view s, double& v) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError("--scale expects MIN:MAX, got '" + text + "'");
    }
  };
  parse(std::string_view(text).substr(0, colon), scale.min);
  parse(std::string_view(text).substr(colon + 1), scale.max);
  scale.validate();
  return scale;
}

void add_data_options(CLI::App* cmd, Options& o, bool ratings_required) {
  auto* r = cmd->add_option("--ratings", o.ratings, "Ratings file (user<TAB>item<TAB>rating)");
  if (ratings_required) r->required();
  cmd->add_option("--edges", o.edges, "Social ties file (from<TAB>to)");
  cmd->add_flag("--symmetrize", o.symmetrize, "Insert the reverse of every tie");
  cmd->add_option("--scale", o.scale, "Rating scale MIN:MAX")->capture_default_str();
}

void add_train_options(CLI::App* cmd, Options& o, bool single_k, bool single_mu) {
  if (single_k) cmd->add_option("--k", o.hp.k, "Latent dimension")->capture_default_str();
  if (single_mu) cmd->add_option("--mu", o.hp.mu, "Social penalty weight")->capture_default_str();
  cmd->add_option("--lambda", o.hp.lambda, "Tikhonov regularization weight")->capture_default_str();
  cmd->add_option("--beta", o.hp.beta, "Initial learning rate")->capture_default_str();
  cmd->add_option("--iters", o.hp.max_iters, "Iteration budget")->capture_default_str();
  cmd->add_option("--epsilon", o.hp.epsilon, "Stop when loss improvement falls below this")
      ->capture_default_str();
  cmd->add_option("--seed", o.hp.seed, "Initialization seed")->capture_default_str();
  cmd->add_option("--init-scale", o.hp.init_scale, "Initial entries uniform on [0, s)")
      ->capture_default_str();
  cmd->add_option("--social-grad", o.social_grad, "Social gradient: printed | full")
      ->check(CLI::IsMember({"printed", "full"}))
      ->capture_default_str();
  cmd->add_flag("--nonneg", o.hp.nonneg_projection, "Clamp factors to >= 0 after each step");
}

void add_eval_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--split", o.split_fraction, "Training fraction")->capture_default_str();
  cmd->add_option("--split-seed", o.split_seed, "Split seed (defaults to --seed)")
      ->each([&o](const std::string&) { o.split_seed_set = true; });
  cmd->add_option("--threads", o.threads, "Worker threads for sweeps (0 = all cores)");
  cmd->add_flag("--no-clamp", o.no_clamp, "Score raw predictions without clipping to the scale");
  cmd->add_option("--out", o.out, "Write the JSON report here");
}

SocialRatingNetwork load(const Options& o) { return load_srn(o.ratings, o.edges, o.symmetrize); }

Hyperparams hyperparams(const Options& o) {
  Hyperparams hp = o.hp;
  hp.social_gradient = parse_social_gradient(o.social_grad);
  hp.validate();
  return hp;
}

EvalConfig eval_config(const Options& o) {
  EvalConfig cfg;
  cfg.split.train_fraction = o.split_fraction;
  cfg.split.seed = o.split_seed_set ? o.split_seed : o.hp.seed;
  cfg.split.validate();
  cfg.scale = parse_scale(o.scale);
  cfg.clamp = !o.no_clamp;
  cfg.threads = o.threads;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

void emit_report(const Options& o, const std::vector<EvalReport>& reports, bool mu_table) {
  std::cout << (mu_table ? format_mu_table(reports) : format_k_table(reports));
  if (!o.out.empty()) write_text(o.out, reports_to_json(reports));
}

std::string trace_json(const TrainTrace& trace) {
  nlohmann::json j;
  j["initial_loss"] = trace.initial_loss;
  j["iterations"] = trace.iterations();
  j["stop"] = to_string(trace.stop);
  j["final_beta"] = trace.final_beta;
  j["losses"] = trace.losses;
  auto& bt = j["backtracks"] = nlohmann::json::array();
  for (const auto& b : trace.backtracks) bt.push_back({{"iteration", b.iteration}, {"beta", b.beta}});
  return j.dump(1) + "\n";
}

void log_backtracks(const TrainTrace& trace) {
  constexpr std::size_t kShown = 5;
  for (std::size_t i = 0; i < std::min(kShown, trace.backtracks.size()); ++i) {
    std::cerr << "safeguard: iteration " << trace.backtracks[i].iteration << ", beta halved to "
              << trace.backtracks[i].beta << '\n';
  }
  if (trace.backtracks.size() > kShown) {
    std::cerr << "safeguard: " << trace.backtracks.size() - kShown << " more halvings\n";
  }
}

int cmd_train(const Options& o) {
  const Hyperparams hp = hyperparams(o);
  const SocialRatingNetwork srn = load(o);
  auto [model, trace] = o.edges.empty() ? train_ratings_only(srn.ratings(), hp) : train(srn, hp);
  log_backtracks(trace);
  save_model(o.out, model);
  write_text(o.trace.empty() ? o.out + ".trace.json" : o.trace, trace_json(trace));
  std::cout << "iterations " << trace.iterations() << " (" << to_string(trace.stop)
            << "), loss " << trace.initial_loss << " -> "
            << (trace.losses.empty() ? trace.initial_loss : trace.losses.back()) << '\n';
  return 0;
}

int cmd_evaluate(const Options& o) {
  const Hyperparams hp = hyperparams(o);
  const EvalConfig cfg = eval_config(o);
  emit_report(o, sweep_k(load(o), {hp.k}, hp, cfg), false);
  return 0;
}

int cmd_sweep_k(const Options& o) {
  const Hyperparams hp = hyperparams(o);
  const EvalConfig cfg = eval_config(o);
  emit_report(o, sweep_k(load(o), o.k_values, hp, cfg), false);
  return 0;
}

int cmd_sweep_mu(const Options& o) {
  const Hyperparams hp = hyperparams(o);
  const EvalConfig cfg = eval_config(o);
  emit_report(o, sweep_mu(load(o), o.mu_values, hp, cfg), true);
  return 0;
}

int cmd_recommend(const Options& o) {
  const SocialRatingNetwork srn = load(o);
  const FactorModel model = load_model(o.model);
  if (model.n_users() != srn.n_users() || model.n_items() != srn.n_items()) {
    throw DataError("model is " + std::to_string(model.n_users()) + "x" +
                    std::to_string(model.n_items()) + " but data has " +
                    std::to_string(srn.n_users()) + " users and " +
                    std::to_string(srn.n_items()) + " items");
  }
  const auto user = srn.users().find(o.user);
  if (!user) throw DataError("unknown user '" + o.user + "'");

  struct Candidate {
    const std::string* label;
    double score;
  };
  std::vector<Candidate> candidates;
  for (std::uint32_t j = 0; j < srn.n_items(); ++j) {
    if (srn.ratings().contains(UserId{*user}, ItemId{j})) continue;
    candidates.push_back({&srn.items().label(j), predict(model, UserId{*user}, ItemId{j})});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return *a.label < *b.label;
  });
  if (candidates.size() > o.top) candidates.resize(o.top);
  for (const auto& c : candidates) std::cout << *c.label << '\t' << c.score << '\n';
  return 0;
}

int cmd_synth(const Options& o) {
  SyntheticParams params = o.synth;
  params.scale = parse_scale(o.scale);
  const SocialRatingNetwork srn = generate_synthetic(params);
  save_srn(srn, o.ratings, o.edges);
  const SrnStats s = srn_stats(srn);
  std::cout << "users " << s.users << ", items " << s.items << ", ratings " << s.ratings
            << ", edges " << s.edges << ", density " << s.density << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-regularized matrix factorization for collaborative filtering"};
  app.require_subcommand(1);
  Options o;
  o.k_values = {2, 4, 6, 8, 10, 12, 14, 16};
  o.mu_values = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

  auto* train_cmd = app.add_subcommand("train", "Fit a model on all ratings and write it out");
  add_data_options(train_cmd, o, true);
  add_train_options(train_cmd, o, true, true);
  train_cmd->add_option("--out", o.out, "Model file")->required();
  train_cmd->add_option("--trace", o.trace, "Trace JSON (default: <out>.trace.json)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Naive, NMF and OA RMSE on one split");
  add_data_options(eval_cmd, o, true);
  add_train_options(eval_cmd, o, true, true);
  add_eval_options(eval_cmd, o);

  auto* sweep_k_cmd = app.add_subcommand("sweep-k", "RMSE of Naive, NMF and OA over k");
  add_data_options(sweep_k_cmd, o, true);
  add_train_options(sweep_k_cmd, o, false, true);
  add_eval_options(sweep_k_cmd, o);
  sweep_k_cmd->add_option("--k", o.k_values, "Comma-separated latent dimensions")
      ->delimiter(',')
      ->capture_default_str();

  auto* sweep_mu_cmd = app.add_subcommand("sweep-mu", "RMSE of OA over mu at fixed k");
  add_data_options(sweep_mu_cmd, o, true);
  add_train_options(sweep_mu_cmd, o, true, false);
  add_eval_options(sweep_mu_cmd, o);
  sweep_mu_cmd->add_option("--mu", o.mu_values, "Comma-separated social weights")
      ->delimiter(',')
      ->capture_default_str();

  auto* rec_cmd = app.add_subcommand("recommend", "Top-N unrated items for one user");
  add_data_options(rec_cmd, o, true);
  rec_cmd->add_option("--model", o.model, "Model file written by train")->required();
  rec_cmd->add_option("--user", o.user, "User label")->required();
  rec_cmd->add_option("--top", o.top, "Number of items")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic community network");
  synth_cmd->add_option("--ratings", o.ratings, "Output ratings file")->required();
  synth_cmd->add_option("--edges", o.edges, "Output edges file")->required();
  synth_cmd->add_option("--scale", o.scale, "Rating scale MIN:MAX")->capture_default_str();
  synth_cmd->add_option("--users", o.synth.users)->capture_default_str();
  synth_cmd->add_option("--items", o.synth.items)->capture_default_str();
  synth_cmd->add_option("--communities", o.synth.communities)->capture_default_str();
  synth_cmd->add_option("--edge-prob", o.synth.edge_probability)->capture_default_str();
  synth_cmd->add_option("--cross-edge-prob", o.synth.cross_edge_probability)->capture_default_str();
  synth_cmd->add_option("--noise", o.synth.noise)->capture_default_str();
  synth_cmd->add_option("--spread", o.synth.taste_spread)->capture_default_str();
  synth_cmd->add_option("--density", o.synth.density)->capture_default_str();
  synth_cmd->add_flag("--disjoint-items", o.synth.disjoint_items);
  synth_cmd->add_option("--seed", o.synth.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_evaluate(o);
    if (*sweep_k_cmd) return cmd_sweep_k(o);
    if (*sweep_mu_cmd) return cmd_sweep_mu(o);
    if (*rec_cmd) return cmd_recommend(o);
    if (*synth_cmd) return cmd_synth(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
