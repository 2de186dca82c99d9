// Timing harness for the sampling kernels: runs the classification sweep
// with the serial reference and the OpenMP path on the same seed and
// reports wall time, throughput and speedup.  The two paths must agree
// exactly; the comparison here is a sanity check, the real assertions
// live in the test suite.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sblab/defining_system.hpp"
#include "sblab/model_zoo.hpp"

using namespace sblab;

namespace {

double now() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
#endif
}

CattaneoSpec bench_spec() {
  CattaneoSpec spec;
  spec.tau = parse_expr("1 + theta/4");
  spec.Lambda = parse_expr("2*theta");
  spec.eps_eq = parse_expr("theta + theta^2/8");
  spec.box = {{0.5, 2.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  return spec;
}

struct Timing {
  double seconds = 0.0;
  ClassificationReport report;
};

Timing run(const SystemEvaluator& ev, int samples, Exec exec) {
  Timing t;
  const double t0 = now();
  t.report = classify(ev, samples, 42, {}, exec);
  t.seconds = now() - t0;
  return t;
}

bool agree(const ClassificationReport& a, const ClassificationReport& b) {
  return a.elliptic == b.elliptic &&
         a.holonomic_verdict == b.holonomic_verdict &&
         a.sampled_points == b.sampled_points &&
         a.singular_points == b.singular_points;
}

void bench(const char* label, const SystemEvaluator& ev, int samples) {
  run(ev, samples, Exec::Serial);  // warm-up
  const Timing serial = run(ev, samples, Exec::Serial);
  const Timing parallel = run(ev, samples, Exec::Parallel);
  std::printf("%-18s %8d pts  serial %8.3f ms (%8.0f pts/s)  parallel %8.3f ms (%8.0f pts/s)  speedup %.2fx%s\n",
              label, samples, serial.seconds * 1e3,
              samples / serial.seconds, parallel.seconds * 1e3,
              samples / parallel.seconds, serial.seconds / parallel.seconds,
              agree(serial.report, parallel.report) ? "" : "  MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  int samples = 2000;
  if (argc > 1) samples = std::atoi(argv[1]);
  if (samples < 10) samples = 10;

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both paths run serially\n");
#endif

  {
    SystemEvaluator ev(cattaneo_system(bench_spec(), parse_expr("theta")));
    bench("heat-relaxation", ev, samples);
  }
  {
    SystemEvaluator ev(maxwell_system());
    bench("vacuum-field", ev, samples);
  }
  {
    SystemEvaluator ev(linear_two_field_case(4).sys);
    bench("two-field-wave", ev, samples);
  }
  return 0;
}
