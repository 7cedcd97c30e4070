#include "temg/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "temg/common.hpp"
#include "temg/sha256.hpp"

namespace temg {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string base_name(const std::string& path) {
  return fs::path(path).filename().string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write: " + path);
  os << text;
  if (!os) throw IoError("write failure: " + path);
}

// Manifest: command + config echo + digests keyed by file basename; no
// absolute paths or timestamps, so reruns into different directories yield
// byte-identical manifests.
void write_manifest(const std::string& path, const std::string& command,
                    const json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["config"] = config;
  json in = json::object();
  for (const auto& p : inputs)
    if (!p.empty()) in[base_name(p)] = sha256_file_hex(p);
  json out = json::object();
  for (const auto& p : outputs)
    if (!p.empty()) out[base_name(p)] = sha256_file_hex(p);
  m["inputs"] = in;
  m["outputs"] = out;
  write_text(path, m.dump(2) + "\n");
}

bool is_graph_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[5] = {0};
  is.read(magic, 4);
  return is && std::string(magic, 4) == "TEMG";
}

json match_config_json(const MotifMatchConfig& m) {
  return json{{"window", m.window},
              {"edge_limit", m.edge_limit},
              {"aggregate_dt", m.aggregate_dt},
              {"random_sampling", m.random_sampling},
              {"sample_seed", m.sample_seed}};
}

json model_config_json(const ModelConfig& m) {
  return json{{"backbone", m.backbone == Backbone::gcn ? "gcn" : "sage_mean"},
              {"layers", m.layers},
              {"hidden", m.hidden},
              {"input_dim", m.input_dim},
              {"head_hidden", m.head_hidden},
              {"fusion_depth", m.fusion_depth},
              {"dropout", m.dropout},
              {"log1p_counts", m.log1p_counts},
              {"seed", m.seed}};
}

json tta_config_json(const TtaConfig& t) {
  return json{{"tau_low", t.tau_low},
              {"tau_high", t.tau_high},
              {"alpha", t.alpha},
              {"beta", t.beta},
              {"temperature", t.temperature},
              {"gamma", t.gamma},
              {"edge_drop_p", t.edge_drop_p},
              {"lr", t.lr},
              {"steps", t.steps},
              {"neg_samples", t.neg_samples},
              {"seed", t.seed},
              {"predict_with_student", t.predict_with_student}};
}

json synth_config_json(const SynthConfig& s) {
  return json{{"n_nodes", s.n_nodes},
              {"n_background_tx", s.n_background_tx},
              {"anomaly_fraction", s.anomaly_fraction},
              {"fanout_mix", s.fanout_mix},
              {"shift_strength", s.shift_strength},
              {"base_gap", s.base_gap},
              {"burst_window", s.burst_window},
              {"seed", s.seed}};
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<uint32_t> labeled_nodes(const TemporalGraph& g) {
  std::vector<uint32_t> out;
  for (uint32_t v = 0; v < g.num_nodes(); ++v)
    if (g.labels[v] >= 0) out.push_back(v);
  return out;
}

EvalResult eval_nodes(const std::vector<double>& logits, const TemporalGraph& g,
                      const std::vector<uint32_t>& nodes, size_t k) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(nodes.size());
  for (uint32_t v : nodes) {
    scores.push_back(sigmoid(logits[v]));
    labels.push_back(g.labels[v]);
  }
  return evaluate(scores, labels, k);
}

}  // namespace

TemporalGraph load_graph_any(const std::string& tx_path,
                             const std::string& labels_path,
                             const std::string& features_path,
                             const CsvSchema& schema, LoadReport* report) {
  TemporalGraph g;
  if (is_graph_cache(tx_path)) {
    g = read_graph_cache(tx_path);
    if (report) report->rows = g.edges.size();
  } else {
    g = load_graph(tx_path, schema, report);
  }
  if (!labels_path.empty()) attach_labels(g, labels_path, report);
  if (!features_path.empty())
    attach_features_from_csv(g, features_path);
  else if (g.features.empty())
    attach_base_features(g);
  return g;
}

void run_synth(const SynthCmd& cmd) {
  validate(cmd.synth);
  if (cmd.out_dir.empty()) throw ConfigError("synth needs an output directory");
  fs::create_directories(cmd.out_dir);
  auto emit = [&](const SynthResult& r, const std::string& prefix) {
    std::string tx = cmd.out_dir + "/" + prefix + "transactions.csv";
    std::string lab = cmd.out_dir + "/" + prefix + "labels.csv";
    std::string pat = cmd.out_dir + "/" + prefix + "patterns.json";
    write_transactions_csv(r.graph, tx);
    write_labels_csv(r.graph, lab);
    write_text(pat, patterns_to_json(r.patterns) + "\n");
    return std::vector<std::string>{tx, lab, pat};
  };
  std::vector<std::string> outputs;
  if (cmd.pair) {
    auto [train, test] = shift_pair(cmd.synth);
    for (auto& p : emit(train, "train_")) outputs.push_back(p);
    for (auto& p : emit(test, "test_")) outputs.push_back(p);
  } else {
    SynthResult r = generate(cmd.synth);
    outputs = emit(r, "");
  }
  json cfg = synth_config_json(cmd.synth);
  cfg["pair"] = cmd.pair;
  write_manifest(cmd.out_dir + "/manifest.json", "synth", cfg, {}, outputs);
}

void run_motifs(const MotifsCmd& cmd) {
  validate(cmd.match);
  if (cmd.out.empty()) throw ConfigError("motifs needs an output path");
  LoadReport rep;
  TemporalGraph g = load_graph_any(cmd.tx, cmd.labels, "", cmd.schema, &rep);
  MotifTaxonomy tax = MotifTaxonomy::enumerate();
  double t0 = now_seconds();
  CountMatrix counts = cmd.use_serial ? count_motifs_serial(g, cmd.match, tax)
                                      : count_motifs(g, cmd.match, tax);
  double elapsed = now_seconds() - t0;
  if (cmd.oracle) {
    if (cmd.match.random_sampling)
      throw ConfigError("oracle verification requires deterministic history");
    if (cmd.match.edge_limit != 0)
      throw ConfigError("oracle verification requires unlimited history");
    CountMatrix expect = count_motifs_bruteforce(g, cmd.match, tax);
    if (!(counts == expect))
      throw VerifyError("fast counter disagrees with the exhaustive oracle");
  }
  write_counts_csv(counts, g, cmd.out);
  if (!cmd.timing.empty()) {
    json t{{"variant", cmd.use_serial ? "serial" : "parallel"},
           {"edges", g.edges.size()},
           {"nodes", g.num_nodes()},
           {"seconds", elapsed}};
    write_text(cmd.timing, t.dump(2) + "\n");
  }
  json cfg = match_config_json(cmd.match);
  cfg["use_serial"] = cmd.use_serial;
  cfg["oracle"] = cmd.oracle;
  write_manifest(cmd.out + ".manifest.json", "motifs", cfg,
                 {cmd.tx, cmd.labels}, {cmd.out});
}

TrainSummary run_train(const TrainCmd& cmd) {
  if (cmd.labels.empty()) throw ConfigError("train needs labels");
  if (cmd.out_model.empty()) throw ConfigError("train needs an output model path");
  LoadReport rep;
  TemporalGraph g = load_graph_any(cmd.tx, cmd.labels, cmd.features, cmd.schema, &rep);
  TrainConfig tc = cmd.train;
  tc.model.input_dim = static_cast<int>(g.features.cols());
  CountMatrix counts = read_counts_csv(cmd.counts, g);
  MotifTaxonomy tax = MotifTaxonomy::enumerate();
  MessageGraph mg = MessageGraph::build(g);
  DataSplit split = chronological_split(g, cmd.ratios);
  TrainResult r = train_model(g, mg, counts, tax, split, tc);
  save_checkpoint(r.params, cmd.out_model, 0);
  if (!cmd.out_log.empty()) write_train_log(r.history, cmd.out_log);
  json cfg = model_config_json(tc.model);
  cfg["lr"] = tc.lr;
  cfg["max_epochs"] = tc.max_epochs;
  cfg["patience"] = tc.patience;
  cfg["ratios"] = cmd.ratios;
  write_manifest(cmd.out_model + ".manifest.json", "train", cfg,
                 {cmd.tx, cmd.labels, cmd.counts, cmd.features},
                 {cmd.out_model, cmd.out_log});
  TrainSummary s;
  s.best_epoch = r.best_epoch;
  s.best_val_auc_prc = r.best_val_auc_prc;
  s.epochs_run = static_cast<int>(r.history.size());
  return s;
}

void run_tta(const TtaCmd& cmd) {
  validate(cmd.tta);
  if (cmd.out_model.empty()) throw ConfigError("tta needs an output model path");
  LoadReport rep;
  TemporalGraph g = load_graph_any(cmd.tx, cmd.labels, cmd.features, cmd.schema, &rep);
  CountMatrix counts = read_counts_csv(cmd.counts, g);
  MotifTaxonomy tax = MotifTaxonomy::enumerate();
  MessageGraph mg = MessageGraph::build(g);
  LoadedCheckpoint ck = load_checkpoint(cmd.model);
  AdaptResult r = adapt(ck.params, mg, g.features, counts, tax, cmd.tta);
  const ModelParams& predictor =
      cmd.tta.predict_with_student ? r.student : r.teacher;
  save_checkpoint(predictor, cmd.out_model, 1);

  json report;
  report["per_step"] = json::array();
  for (const auto& d : r.steps)
    report["per_step"].push_back(json{{"step", d.step},
                                      {"mask_size", d.mask_size},
                                      {"l_sim", d.l_sim},
                                      {"l_info", d.l_info},
                                      {"l_total", d.l_total},
                                      {"info_skipped", d.info_skipped}});
  if (!cmd.labels.empty()) {
    EvalResult before =
        eval_nodes(forward(ck.params, mg, g.features, counts, tax, Mode::eval, 0).logits,
                   g, labeled_nodes(g), 0);
    EvalResult after = eval_nodes(r.final_logits, g, labeled_nodes(g), 0);
    report["final_metrics"] = json::parse(to_json(after));
    report["pre_adaptation_metrics"] = json::parse(to_json(before));
  } else {
    report["final_metrics"] = nullptr;
  }
  if (!cmd.out_report.empty()) write_text(cmd.out_report, report.dump(2) + "\n");

  write_manifest(cmd.out_model + ".manifest.json", "tta", tta_config_json(cmd.tta),
                 {cmd.tx, cmd.counts, cmd.labels, cmd.model},
                 {cmd.out_model, cmd.out_report});
}

EvalResult run_eval(const EvalCmd& cmd) {
  if (cmd.labels.empty()) throw ConfigError("eval needs labels");
  LoadReport rep;
  TemporalGraph g = load_graph_any(cmd.tx, cmd.labels, cmd.features, cmd.schema, &rep);
  CountMatrix counts = read_counts_csv(cmd.counts, g);
  MotifTaxonomy tax = MotifTaxonomy::enumerate();
  MessageGraph mg = MessageGraph::build(g);
  LoadedCheckpoint ck = load_checkpoint(cmd.model);
  ForwardResult fwd = forward(ck.params, mg, g.features, counts, tax, Mode::eval, 0);
  std::vector<uint32_t> nodes;
  if (cmd.split == "all") {
    nodes = labeled_nodes(g);
  } else {
    DataSplit split = chronological_split(g);
    if (cmd.split == "train")
      nodes = split.train;
    else if (cmd.split == "val")
      nodes = split.val;
    else if (cmd.split == "test")
      nodes = split.test;
    else
      throw ConfigError("unknown split: " + cmd.split);
  }
  EvalResult r = eval_nodes(fwd.logits, g, nodes, cmd.k);
  if (!cmd.out.empty()) write_text(cmd.out, to_json(r) + "\n");
  json cfg{{"split", cmd.split}, {"k", cmd.k}};
  if (!cmd.out.empty())
    write_manifest(cmd.out + ".manifest.json", "eval", cfg,
                   {cmd.tx, cmd.labels, cmd.counts, cmd.model}, {cmd.out});
  return r;
}

void run_ingest(const IngestCmd& cmd) {
  if (cmd.out_cache.empty()) throw ConfigError("ingest needs an output path");
  LoadReport rep;
  TemporalGraph g = load_graph(cmd.tx, cmd.schema, &rep);
  if (!cmd.labels.empty()) attach_labels(g, cmd.labels, &rep);
  attach_base_features(g);
  write_graph_cache(g, cmd.out_cache);
  if (!cmd.out_report.empty()) {
    json r{{"rows", rep.rows},
           {"self_transfers_dropped", rep.self_transfers},
           {"label_rows", rep.label_rows},
           {"labels_unknown_address", rep.labels_unknown_address},
           {"nodes", g.num_nodes()},
           {"edges", g.edges.size()}};
    write_text(cmd.out_report, r.dump(2) + "\n");
  }
  write_manifest(cmd.out_cache + ".manifest.json", "ingest", json::object(),
                 {cmd.tx, cmd.labels}, {cmd.out_cache});
}

void run_bench(const BenchCmd& cmd) {
  if (cmd.out.empty()) throw ConfigError("bench needs an output path");
  MotifTaxonomy tax = MotifTaxonomy::enumerate();
  std::ofstream os(cmd.out, std::ios::binary);
  if (!os) throw IoError("cannot write bench csv: " + cmd.out);
  os << "variant,edges,nodes,seconds\n";
  os.precision(6);
  auto time_one = [&](const char* variant, const TemporalGraph& g,
                      const MotifMatchConfig& match, int mode) {
    double t0 = now_seconds();
    CountMatrix c = mode == 0   ? count_motifs(g, match, tax)
                    : mode == 1 ? count_motifs_serial(g, match, tax)
                                : count_motifs_bruteforce(g, match, tax);
    double dt = now_seconds() - t0;
    os << variant << "," << g.edges.size() << "," << g.num_nodes() << ","
       << std::fixed << dt << "\n";
    return c.total();
  };
  for (size_t m : cmd.fast_sizes) {
    TemporalGraph g = burst_stress_graph(m, 200, 20, cmd.seed);
    MotifMatchConfig match;
    match.window = 300;
    match.edge_limit = 100;
    match.threads = cmd.threads;
    time_one("parallel_k100", g, match, 0);
    time_one("serial_k100", g, match, 1);
  }
  for (size_t m : cmd.brute_sizes) {
    TemporalGraph g = burst_stress_graph(m, 3, 5, cmd.seed);
    MotifMatchConfig match;
    match.window = static_cast<int64_t>(m) + 1;
    match.edge_limit = 0;
    match.threads = cmd.threads;
    time_one("bruteforce", g, match, 2);
  }
  if (!os) throw IoError("write failure on bench csv: " + cmd.out);
}

}  // namespace temg
