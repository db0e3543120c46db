#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>

#include "qlh/field.hpp"

namespace qlh {

/// In-place complex FFTs over whole grids, backed by FFTW. Plans are cached
/// per (shape, direction) and created with FFTW_ESTIMATE so the algorithm
/// choice is reproducible run to run. FFTW_UNALIGNED lets the cached plan
/// execute on any buffer via the new-array interface.
class Fft {
public:
    static void forward(ComplexField& f) { execute(f, FFTW_FORWARD); }

    /// Inverse transform, scaled by 1/N so forward+backward is the identity.
    static void backward(ComplexField& f) {
        execute(f, FFTW_BACKWARD);
        const double inv = 1.0 / static_cast<double>(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= inv;
    }

private:
    static void execute(ComplexField& f, int sign) {
        fftw_plan plan = cached_plan(f.grid(), sign);
        auto* p = reinterpret_cast<fftw_complex*>(f.data());
        fftw_execute_dft(plan, p, p);
    }

    static fftw_plan cached_plan(const GridSpec& g, int sign) {
        using Key = std::tuple<int, int, int, int, int>;
        static std::map<Key, fftw_plan> cache;
        static std::mutex mtx;
        // plan creation is not thread-safe; execution is
        std::lock_guard<std::mutex> lock(mtx);
        Key key{g.dim(), g.points(0), g.points(1), g.points(2), sign};
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;

        int n[3];
        int rank = 0;
        for (int a = 0; a < 3; ++a)
            if (g.points(a) > 1) n[rank++] = g.points(a);
        if (rank == 0) {  // degenerate single-point grid
            rank = 1;
            n[0] = 1;
        }
        std::vector<complexd> dummy(g.size());
        auto* p = reinterpret_cast<fftw_complex*>(dummy.data());
        fftw_plan plan = fftw_plan_dft(rank, n, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, plan);
        return plan;
    }
};

}  // namespace qlh
