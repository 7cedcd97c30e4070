// temg: temporal motif features and adaptive anomaly scoring for
// transaction graphs. See README.md for the data formats.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "temg/common.hpp"
#include "temg/pipeline.hpp"
#include "temg/taxonomy.hpp"

namespace {

void add_schema_options(CLI::App* cmd, temg::CsvSchema& schema) {
  cmd->add_option("--col-src", schema.src, "Source column name");
  cmd->add_option("--col-dst", schema.dst, "Destination column name");
  cmd->add_option("--col-time", schema.time, "Timestamp column name");
  cmd->add_option("--col-amount", schema.amount, "Amount column name");
}

temg::Backbone parse_backbone(const std::string& name) {
  if (name == "gcn") return temg::Backbone::gcn;
  if (name == "sage_mean") return temg::Backbone::sage_mean;
  throw temg::ConfigError("unknown backbone: " + name +
                          " (expected gcn or sage_mean)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal motif features and adaptive anomaly scoring"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file");
  app.allow_config_extras(false);

  int threads = 0;
  app.add_option("--threads", threads,
                 "OpenMP thread count for every kernel (0 = library default)");
  auto apply_threads = [&threads] {
    if (threads > 0) omp_set_num_threads(threads);
  };

  // ---- taxonomy ------------------------------------------------------
  auto* c_tax = app.add_subcommand(
      "taxonomy", "Print the three-edge motif catalogue as JSON");
  std::string tax_out;
  c_tax->add_option("--out", tax_out, "Write to a file instead of stdout");
  c_tax->callback([&] {
    std::string j = temg::MotifTaxonomy::enumerate().to_json();
    if (tax_out.empty()) {
      std::cout << j << "\n";
    } else {
      std::ofstream os(tax_out, std::ios::binary);
      if (!os) throw temg::IoError("cannot write: " + tax_out);
      os << j << "\n";
    }
  });

  // ---- synth ---------------------------------------------------------
  auto* c_synth = app.add_subcommand(
      "synth", "Generate a synthetic transaction benchmark");
  temg::SynthCmd synth;
  c_synth->add_option("--out", synth.out_dir, "Output directory")->required();
  c_synth->add_flag("--pair", synth.pair,
                    "Emit a train/test pair; the test side gets the shift");
  c_synth->add_option("--nodes", synth.synth.n_nodes, "Node count");
  c_synth->add_option("--background-tx", synth.synth.n_background_tx,
                      "Background transaction count");
  c_synth->add_option("--anomaly-fraction", synth.synth.anomaly_fraction,
                      "Fraction of nodes carrying planted patterns");
  c_synth->add_option("--fanout-mix", synth.synth.fanout_mix,
                      "Fraction of planted patterns that distribute funds");
  c_synth->add_option("--shift", synth.synth.shift_strength,
                      "Distribution shift strength");
  c_synth->add_option("--base-gap", synth.synth.base_gap,
                      "Mean background inter-arrival (seconds)");
  c_synth->add_option("--burst-window", synth.synth.burst_window,
                      "Span of one planted pattern (seconds)");
  c_synth->add_option("--seed", synth.synth.seed, "Generator seed");
  c_synth->callback([&] {
    apply_threads();
    temg::run_synth(synth);
  });

  // ---- ingest --------------------------------------------------------
  auto* c_ingest = app.add_subcommand(
      "ingest", "Validate a transaction CSV and write a binary graph cache");
  temg::IngestCmd ingest;
  c_ingest->add_option("--tx", ingest.tx, "Transaction CSV")->required();
  c_ingest->add_option("--labels", ingest.labels, "Label CSV (address,label)");
  c_ingest->add_option("--out", ingest.out_cache, "Cache path")->required();
  c_ingest->add_option("--report", ingest.out_report, "Load report JSON");
  add_schema_options(c_ingest, ingest.schema);
  c_ingest->callback([&] {
    apply_threads();
    temg::run_ingest(ingest);
  });

  // ---- motifs --------------------------------------------------------
  auto* c_motifs = app.add_subcommand(
      "motifs", "Count temporal motifs per node and role");
  temg::MotifsCmd motifs;
  c_motifs->add_option("--tx", motifs.tx, "Transaction CSV or graph cache")
      ->required();
  c_motifs->add_option("--labels", motifs.labels, "Label CSV (optional)");
  c_motifs->add_option("--out", motifs.out, "Counts CSV")->required();
  c_motifs->add_option("--timing", motifs.timing,
                       "Write kernel timing JSON here");
  c_motifs->add_option("--window", motifs.match.window,
                       "History window in seconds");
  c_motifs->add_option("--edge-limit", motifs.match.edge_limit,
                       "History edges kept per anchor (0 = unlimited)");
  c_motifs->add_option("--aggregate-dt", motifs.match.aggregate_dt,
                       "Merge same-pair edges closer than this (0 = off)");
  c_motifs->add_flag("--random-sampling", motifs.match.random_sampling,
                     "Sample history uniformly instead of most-recent");
  c_motifs->add_option("--sample-seed", motifs.match.sample_seed,
                       "Seed for --random-sampling");
  c_motifs->add_flag("--serial", motifs.use_serial,
                     "Use the single-threaded reference kernel");
  c_motifs->add_flag("--oracle", motifs.oracle,
                     "Cross-check against the exhaustive counter (small inputs)");
  add_schema_options(c_motifs, motifs.schema);
  c_motifs->callback([&] {
    apply_threads();
    motifs.match.threads = threads;
    temg::run_motifs(motifs);
  });

  // ---- train ---------------------------------------------------------
  auto* c_train = app.add_subcommand(
      "train", "Train the anomaly classifier on labeled nodes");
  temg::TrainCmd train;
  std::string backbone = "gcn";
  std::vector<double> ratios;
  c_train->add_option("--tx", train.tx, "Transaction CSV or graph cache")
      ->required();
  c_train->add_option("--labels", train.labels, "Label CSV")->required();
  c_train->add_option("--counts", train.counts, "Motif counts CSV")->required();
  c_train->add_option("--features", train.features,
                      "Node feature CSV overriding the built-in features");
  c_train->add_option("--out-model", train.out_model, "Checkpoint path")
      ->required();
  c_train->add_option("--out-log", train.out_log, "Epoch log (JSON lines)");
  c_train->add_option("--backbone", backbone, "gcn | sage_mean");
  c_train->add_option("--layers", train.train.model.layers,
                      "Message-passing layers");
  c_train->add_option("--hidden", train.train.model.hidden, "Hidden width");
  c_train->add_option("--head-hidden", train.train.model.head_hidden,
                      "Scoring head hidden width");
  c_train->add_option("--fusion-depth", train.train.model.fusion_depth,
                      "Fusion MLP depth (0, 1 or 2)");
  c_train->add_option("--dropout", train.train.model.dropout,
                      "Feature dropout probability");
  c_train->add_flag("--log1p-counts", train.train.model.log1p_counts,
                    "Squash motif counts with log1p before projecting");
  c_train->add_option("--seed", train.train.model.seed,
                      "Initialization and dropout seed");
  c_train->add_option("--lr", train.train.lr, "Adam learning rate");
  c_train->add_option("--max-epochs", train.train.max_epochs, "Epoch budget");
  c_train->add_option("--patience", train.train.patience,
                      "Non-improving epochs tolerated before stopping");
  c_train->add_option("--ratios", ratios,
                      "Chronological split ratios (three values)")
      ->expected(3);
  add_schema_options(c_train, train.schema);
  c_train->callback([&] {
    apply_threads();
    train.train.model.backbone = parse_backbone(backbone);
    if (!ratios.empty())
      train.ratios = {ratios[0], ratios[1], ratios[2]};
    temg::TrainSummary s = temg::run_train(train);
    std::printf("best_epoch=%d best_val_auc_prc=%.6f epochs_run=%d\n",
                s.best_epoch, s.best_val_auc_prc, s.epochs_run);
  });

  // ---- tta -----------------------------------------------------------
  auto* c_tta = app.add_subcommand(
      "tta", "Adapt a trained checkpoint to an unlabeled graph");
  temg::TtaCmd tta;
  c_tta->add_option("--tx", tta.tx, "Transaction CSV or graph cache")
      ->required();
  c_tta->add_option("--counts", tta.counts, "Motif counts CSV")->required();
  c_tta->add_option("--labels", tta.labels,
                    "Label CSV; enables the final metric block");
  c_tta->add_option("--model", tta.model, "Input checkpoint")->required();
  c_tta->add_option("--features", tta.features,
                    "Node feature CSV overriding the built-in features");
  c_tta->add_option("--out-model", tta.out_model, "Adapted checkpoint")
      ->required();
  c_tta->add_option("--out-report", tta.out_report, "Per-step report JSON");
  c_tta->add_option("--tau-low", tta.tta.tau_low,
                    "Confidence band lower bound (exclusive)");
  c_tta->add_option("--tau-high", tta.tta.tau_high,
                    "Confidence band upper bound (inclusive)");
  c_tta->add_option("--alpha", tta.tta.alpha, "Teacher EMA retention");
  c_tta->add_option("--beta", tta.tta.beta, "Contrastive loss weight");
  c_tta->add_option("--temperature", tta.tta.temperature,
                    "Contrastive softmax temperature");
  c_tta->add_option("--gamma", tta.tta.gamma,
                    "Motif-feature cosine bar for positives");
  c_tta->add_option("--edge-drop-p", tta.tta.edge_drop_p,
                    "Message-edge drop probability");
  c_tta->add_option("--lr", tta.tta.lr, "Student learning rate");
  c_tta->add_option("--steps", tta.tta.steps, "Adaptation steps");
  c_tta->add_option("--neg-samples", tta.tta.neg_samples,
                    "Negatives per contrastive anchor");
  c_tta->add_option("--seed", tta.tta.seed, "Adaptation seed");
  c_tta->add_flag("--predict-with-student", tta.tta.predict_with_student,
                  "Score with the student instead of the teacher");
  add_schema_options(c_tta, tta.schema);
  c_tta->callback([&] {
    apply_threads();
    temg::run_tta(tta);
  });

  // ---- eval ----------------------------------------------------------
  auto* c_eval = app.add_subcommand(
      "eval", "Score a graph with a checkpoint and report ranking metrics");
  temg::EvalCmd eval;
  c_eval->add_option("--tx", eval.tx, "Transaction CSV or graph cache")
      ->required();
  c_eval->add_option("--labels", eval.labels, "Label CSV")->required();
  c_eval->add_option("--counts", eval.counts, "Motif counts CSV")->required();
  c_eval->add_option("--model", eval.model, "Checkpoint")->required();
  c_eval->add_option("--features", eval.features,
                     "Node feature CSV overriding the built-in features");
  c_eval->add_option("--out", eval.out, "Metrics JSON path");
  c_eval->add_option("--split", eval.split, "all | train | val | test");
  c_eval->add_option("--k", eval.k, "Cutoff for recall@k (0 = positives)");
  add_schema_options(c_eval, eval.schema);
  c_eval->callback([&] {
    apply_threads();
    temg::EvalResult r = temg::run_eval(eval);
    std::cout << temg::to_json(r) << "\n";
  });

  // ---- bench ---------------------------------------------------------
  auto* c_bench = app.add_subcommand(
      "bench", "Time the counting kernels on bursty synthetic workloads");
  temg::BenchCmd bench;
  c_bench->add_option("--out", bench.out, "Timing CSV")->required();
  c_bench->add_option("--fast-sizes", bench.fast_sizes,
                      "Edge counts for the windowed kernels");
  c_bench->add_option("--brute-sizes", bench.brute_sizes,
                      "Edge counts for the exhaustive counter");
  c_bench->add_option("--seed", bench.seed, "Workload seed");
  c_bench->callback([&] {
    apply_threads();
    bench.threads = threads;
    temg::run_bench(bench);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const temg::VerifyError& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return 3;
  } catch (const temg::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const temg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
