#ifndef STOCHMOM_FFT_HPP
#define STOCHMOM_FFT_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace stochmom::fft {

namespace detail {
// FFTW's planner is not thread-safe; execution with new-array calls is.
inline std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const noexcept
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
}  // namespace detail

enum class Direction { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

/// Unnormalized complex DFT of length n:
/// forward  X_k = sum_j x_j exp(-2 pi i j k / n),
/// backward x_j = sum_k X_k exp(+2 pi i j k / n).
inline void transform(std::span<std::complex<double>> data, Direction dir)
{
    const int n = static_cast<int>(data.size());
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    std::unique_ptr<fftw_plan_s, detail::PlanDeleter> plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan.reset(fftw_plan_dft_1d(n, ptr, ptr, static_cast<int>(dir), FFTW_ESTIMATE));
    }
    fftw_execute(plan.get());
}

/// Angular wavenumbers matching the DFT bin order for spacing h.
inline std::vector<double> wavenumbers(std::size_t n, double h)
{
    std::vector<double> k(n);
    const double dk = 2.0 * 3.14159265358979323846 / (static_cast<double>(n) * h);
    for (std::size_t j = 0; j < n; ++j) {
        const auto signed_j = j < (n + 1) / 2 ? static_cast<double>(j)
                                              : static_cast<double>(j) - static_cast<double>(n);
        k[j] = signed_j * dk;
    }
    return k;
}

}  // namespace stochmom::fft

#endif  // STOCHMOM_FFT_HPP
