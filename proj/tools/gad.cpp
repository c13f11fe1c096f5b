#include <iostream>

#include <CLI11.hpp>

#include "gad/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Graph autoencoder anomaly detection (GAT / GCN encoders)"};
  app.require_subcommand(1);

  std::string config;
  gad::CommandOverrides ov;
  std::uint64_t seed = 0;
  std::string out;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration (JSON) or a run manifest")->required();
    sub->add_option("--seed", seed, "Override train.seed");
    sub->add_option("--out", out, "Override output.dir");
    return sub;
  };
  CLI::App* train = add("train", "Train a model; writes model, loss log, and run manifest");
  CLI::App* score = add("score", "Score nodes with a trained model; writes node_id,score,flag CSV");
  CLI::App* eval = add("eval", "Compute AUC/F1/precision/recall from scores and labels");
  CLI::App* inject = add("inject", "Plant anomalies; writes edges, features, and labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gad::kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) ov.seed = seed;
  if (chosen->count("--out") > 0) ov.out = out;

  if (chosen == train) return gad::cmd_train(config, ov, std::cerr);
  if (chosen == score) return gad::cmd_score(config, ov, std::cerr);
  if (chosen == eval) return gad::cmd_eval(config, ov, std::cerr);
  if (chosen == inject) return gad::cmd_inject(config, ov, std::cerr);
  return gad::kExitConfig;
}
