// Compares the OpenMP counting kernel against the single-threaded reference
// and (on small inputs) the exhaustive counter. Prints a CSV to stdout:
//   variant,edges,nodes,window,edge_limit,seconds,total_count
//
// Usage: bench_motifs [edges...]   (defaults: 10000 20000 40000 80000)

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "temg/motifs.hpp"
#include "temg/synth.hpp"

using namespace temg;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void report(const char* variant, const TemporalGraph& g,
            const MotifMatchConfig& cfg, double seconds, uint64_t total) {
  std::printf("%s,%zu,%zu,%lld,%lld,%.6f,%llu\n", variant, g.edges.size(),
              g.num_nodes(), static_cast<long long>(cfg.window),
              static_cast<long long>(cfg.edge_limit), seconds,
              static_cast<unsigned long long>(total));
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<size_t> sizes;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--help") == 0 || std::strcmp(argv[i], "-h") == 0) {
      std::printf("usage: bench_motifs [edges...]   (defaults: 10000 20000 40000 80000)\n");
      return 0;
    }
    size_t m = 0;
    auto [p, ec] = std::from_chars(argv[i], argv[i] + std::strlen(argv[i]), m);
    if (ec != std::errc{} || *p != '\0' || m == 0) {
      std::fprintf(stderr, "bench_motifs: '%s' is not a positive edge count\n", argv[i]);
      return 2;
    }
    sizes.push_back(m);
  }
  if (sizes.empty()) sizes = {10000, 20000, 40000, 80000};

  MotifTaxonomy tax = MotifTaxonomy::enumerate();
  std::printf("variant,edges,nodes,window,edge_limit,seconds,total_count\n");

  for (size_t m : sizes) {
    TemporalGraph g = burst_stress_graph(m, 200, 20, 1);
    MotifMatchConfig cfg;
    cfg.window = 300;
    cfg.edge_limit = 100;

    double t0 = now_seconds();
    CountMatrix parallel = count_motifs(g, cfg, tax);
    double t1 = now_seconds();
    CountMatrix serial = count_motifs_serial(g, cfg, tax);
    double t2 = now_seconds();

    report("parallel", g, cfg, t1 - t0, parallel.total());
    report("serial", g, cfg, t2 - t1, serial.total());
    if (!(parallel == serial)) {
      std::fprintf(stderr, "MISMATCH: parallel and serial counts differ at m=%zu\n", m);
      return 1;
    }
  }

  // The exhaustive counter only scales to tiny inputs; time it where legal.
  for (size_t m : {size_t{100}, size_t{200}, size_t{400}}) {
    TemporalGraph g = burst_stress_graph(m, 3, 5, 1);
    MotifMatchConfig cfg;
    cfg.window = static_cast<int64_t>(m) + 1;
    cfg.edge_limit = 0;

    double t0 = now_seconds();
    CountMatrix brute = count_motifs_bruteforce(g, cfg, tax);
    double t1 = now_seconds();
    CountMatrix fast = count_motifs(g, cfg, tax);
    double t2 = now_seconds();

    report("bruteforce", g, cfg, t1 - t0, brute.total());
    report("parallel_unlimited", g, cfg, t2 - t1, fast.total());
    if (!(brute == fast)) {
      std::fprintf(stderr, "MISMATCH: exhaustive and fast counts differ at m=%zu\n", m);
      return 1;
    }
  }
  return 0;
}
