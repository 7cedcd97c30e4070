#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "temg/graph.hpp"
#include "temg/metrics.hpp"
#include "temg/motifs.hpp"
#include "temg/synth.hpp"
#include "temg/train.hpp"
#include "temg/tta.hpp"

namespace temg {

// Command-level orchestration shared by the CLI and by tests. Every run_*
// writes its artifacts plus a manifest (config echo, seeds, input/output
// digests, no paths or timestamps) so a run can be reproduced bit-exactly.

struct SynthCmd {
  SynthConfig synth;
  bool pair = false;  // emit train_*/test_* with the configured shift
  std::string out_dir;
};
void run_synth(const SynthCmd& cmd);

struct MotifsCmd {
  std::string tx;           // transaction csv or graph cache
  std::string labels;       // optional
  std::string out;          // counts csv
  std::string timing;       // optional timing json (excluded from manifest)
  CsvSchema schema;
  MotifMatchConfig match;
  bool use_serial = false;  // force the reference kernel
  bool oracle = false;      // verify against the exhaustive counter
};
void run_motifs(const MotifsCmd& cmd);

struct TrainCmd {
  std::string tx;
  std::string labels;
  std::string counts;
  std::string features;  // optional override csv
  std::string out_model;
  std::string out_log;
  CsvSchema schema;
  TrainConfig train;
  std::array<double, 3> ratios = {0.6, 0.2, 0.2};
};
struct TrainSummary {
  int best_epoch = 0;
  double best_val_auc_prc = 0.0;
  int epochs_run = 0;
};
TrainSummary run_train(const TrainCmd& cmd);

struct TtaCmd {
  std::string tx;
  std::string counts;
  std::string labels;  // optional; enables final metrics in the report
  std::string model;
  std::string features;  // optional override csv
  std::string out_model;
  std::string out_report;
  CsvSchema schema;
  TtaConfig tta;
};
void run_tta(const TtaCmd& cmd);

struct EvalCmd {
  std::string tx;
  std::string labels;
  std::string counts;
  std::string model;
  std::string features;  // optional override csv
  std::string out;       // metrics json
  CsvSchema schema;
  std::string split = "all";  // all | train | val | test
  size_t k = 0;               // 0: number of positives
};
EvalResult run_eval(const EvalCmd& cmd);

struct IngestCmd {
  std::string tx;
  std::string labels;  // optional
  std::string out_cache;
  std::string out_report;  // optional load report json
  CsvSchema schema;
};
void run_ingest(const IngestCmd& cmd);

struct BenchCmd {
  std::string out;  // csv: variant,edges,nodes,seconds
  std::vector<size_t> fast_sizes = {10000, 20000, 40000, 80000};
  std::vector<size_t> brute_sizes = {100, 200, 400};
  int threads = 0;
  uint64_t seed = 1;
};
void run_bench(const BenchCmd& cmd);

// Loads either a transaction csv or a graph cache (sniffed by magic bytes),
// attaches labels / features as requested.
TemporalGraph load_graph_any(const std::string& tx_path,
                             const std::string& labels_path,
                             const std::string& features_path,
                             const CsvSchema& schema, LoadReport* report);

}  // namespace temg
