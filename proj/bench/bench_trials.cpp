#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "anonsim/trials.hpp"

using namespace anonsim;

namespace {

template <typename F>
double time_it(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t trials = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 40;
    const Scenario scenarios[] = {
        {"dandelion-line/matching", TopologySpec::spliced_line(1000), Protocol::Dandelion,
         Estimator::Matching, Knowledge::Dynamic, 0.2, 0.0},
        {"flooding-4reg/ward", TopologySpec::undirected_regular(1000, 4), Protocol::Flooding,
         Estimator::FloodingWard, Knowledge::Static, 0.2, 0.0},
        {"diffusion-16reg/first-spy", TopologySpec::random_regular(1000, 8), Protocol::Diffusion,
         Estimator::FirstSpy, Knowledge::Static, 0.2, 0.0},
    };
    std::printf("threads: %d, trials per scenario: %zu\n", omp_get_max_threads(), trials);
    std::printf("%-28s %10s %10s %8s %s\n", "scenario", "serial_s", "omp_s", "speedup", "match");
    for (const auto& s : scenarios) {
        std::vector<TrialResult> a, b;
        const double ts = time_it([&] { a = run_trials_serial(s, trials, 7); });
        const double tp = time_it([&] { b = run_trials_parallel(s, trials, 7); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i)
            same = a[i].seed == b[i].seed && a[i].metrics.precision == b[i].metrics.precision &&
                   a[i].metrics.recall == b[i].metrics.recall;
        std::printf("%-28s %10.3f %10.3f %8.2f %s\n", s.label.c_str(), ts, tp, ts / tp,
                    same ? "yes" : "NO");
        if (!same) return 1;
    }
    return 0;
}
