#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "histad/kernels.hpp"
#include "histad/rng.hpp"

// Times the OpenMP kernels against the serial reference on GAN-sized and
// larger shapes, and re-checks bit-identity on the way.

namespace {

using histad::RandomStream;
namespace k = histad::kernels;

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<double> randvec(std::size_t n, RandomStream& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

void bench_shape(std::size_t batch, std::size_t in, std::size_t out, int reps) {
    RandomStream rng(9001);
    const std::vector<double> x = randvec(batch * in, rng);
    const std::vector<double> w = randvec(out * in, rng);
    const std::vector<double> b = randvec(out, rng);
    std::vector<double> y_ser(batch * out), y_omp(batch * out);
    std::vector<double> dy = randvec(batch * out, rng);
    std::vector<double> dx_ser(batch * in), dx_omp(batch * in);
    std::vector<double> dw_ser(out * in, 0.0), dw_omp(out * in, 0.0);
    std::vector<double> db_ser(out, 0.0), db_omp(out, 0.0);

    const double fwd_s = time_ms(
        [&] { k::serial::linear_forward(x.data(), w.data(), b.data(), y_ser.data(), batch, in, out); },
        reps);
    const double fwd_p = time_ms(
        [&] { k::linear_forward(x.data(), w.data(), b.data(), y_omp.data(), batch, in, out); },
        reps);
    const double bwi_s = time_ms(
        [&] { k::serial::linear_backward_input(dy.data(), w.data(), dx_ser.data(), batch, in, out); },
        reps);
    const double bwi_p = time_ms(
        [&] { k::linear_backward_input(dy.data(), w.data(), dx_omp.data(), batch, in, out); },
        reps);
    const double bwp_s = time_ms(
        [&] {
            k::serial::linear_backward_params(dy.data(), x.data(), dw_ser.data(), db_ser.data(),
                                              batch, in, out);
        },
        reps);
    const double bwp_p = time_ms(
        [&] {
            k::linear_backward_params(dy.data(), x.data(), dw_omp.data(), db_omp.data(), batch,
                                      in, out);
        },
        reps);

    const bool same = y_ser == y_omp && dx_ser == dx_omp && dw_ser == dw_omp && db_ser == db_omp;
    std::printf("%5zu x %4zu x %4zu | fwd %8.3f /%8.3f ms | bw_in %8.3f /%8.3f ms | "
                "bw_par %8.3f /%8.3f ms | bit-identical: %s\n",
                batch, in, out, fwd_s, fwd_p, bwi_s, bwi_p, bwp_s, bwp_p, same ? "yes" : "NO");
    if (!same) std::exit(1);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif
    std::printf("shape (batch x in x out)      serial / parallel\n");
    bench_shape(64, 16, 16, 200);     // GAN training shape
    bench_shape(256, 64, 64, 100);
    bench_shape(512, 256, 256, 20);
    bench_shape(1024, 784, 256, 5);   // image-scale shape
    return 0;
}
