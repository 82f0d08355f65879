#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

namespace ratchet {

namespace detail {

/// FFTW's planner and plan destruction are not thread safe; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* plan) const {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
};

using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace detail

/// Batched 1-D DFTs over the rows and columns of a column-major n-by-n
/// complex matrix. Plans are made once and executed on any matrix of the
/// same shape, so one instance may be shared by concurrent evolutions.
///
/// The transforms are unnormalised and carry no index-shift phases:
///   to_position_raw(A) = B A F,   to_momentum_raw(A) = F A B,
/// with B (F) the backward (forward) DFT matrix, so a round trip scales by n^2.
class FourierTransform {
public:
    explicit FourierTransform(std::size_t n) : n_(n) {
        Eigen::MatrixXcd scratch(n, n);
        auto* d = reinterpret_cast<fftw_complex*>(scratch.data());
        const int len[1] = {static_cast<int>(n)};
        const int howmany = static_cast<int>(n);
        const int nn = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::lock_guard lock(detail::fftw_planner_mutex());
        col_backward_.reset(fftw_plan_many_dft(1, len, howmany, d, nullptr, 1, nn, d, nullptr, 1, nn,
                                               FFTW_BACKWARD, flags));
        col_forward_.reset(fftw_plan_many_dft(1, len, howmany, d, nullptr, 1, nn, d, nullptr, 1, nn,
                                              FFTW_FORWARD, flags));
        row_backward_.reset(fftw_plan_many_dft(1, len, howmany, d, nullptr, nn, 1, d, nullptr, nn, 1,
                                               FFTW_BACKWARD, flags));
        row_forward_.reset(fftw_plan_many_dft(1, len, howmany, d, nullptr, nn, 1, d, nullptr, nn, 1,
                                              FFTW_FORWARD, flags));
        std::vector<double> real(n * n);
        std::vector<std::complex<double>> half(n * (n / 2 + 1));
        real_2d_.reset(fftw_plan_dft_r2c_2d(nn, nn, real.data(),
                                            reinterpret_cast<fftw_complex*>(half.data()), flags));
    }

    std::size_t size() const { return n_; }

    void to_position_raw(Eigen::MatrixXcd& a) const {
        run(col_backward_.get(), a);
        run(row_forward_.get(), a);
    }

    void to_momentum_raw(Eigen::MatrixXcd& a) const {
        run(col_forward_.get(), a);
        run(row_backward_.get(), a);
    }

    /// The same two maps for Hermitian A, reading only the upper triangle and
    /// returning an exactly Hermitian result. A Hermitian S + iA packs into the
    /// real matrix R = S + A, so one real 2-D transform G of R gives the
    /// result as ((1+i) G + (1-i) G^dag) / 2.
    void to_position_hermitian(Eigen::MatrixXcd& a) const { hermitian(a, true); }
    void to_momentum_hermitian(Eigen::MatrixXcd& a) const { hermitian(a, false); }

    /// Process-wide cached transform for size n.
    static const FourierTransform& cached(std::size_t n) {
        static std::mutex m;
        static std::map<std::size_t, std::unique_ptr<FourierTransform>> cache;
        std::lock_guard lock(m);
        auto& slot = cache[n];
        if (!slot) slot = std::make_unique<FourierTransform>(n);
        return *slot;
    }

private:
    void run(fftw_plan plan, Eigen::MatrixXcd& a) const {
        auto* d = reinterpret_cast<fftw_complex*>(a.data());
        fftw_execute_dft(plan, d, d);
    }

    void hermitian(Eigen::MatrixXcd& a, bool position) const {
        const std::size_t n = n_;
        const std::size_t h = n / 2 + 1;
        thread_local std::vector<double> x;
        thread_local std::vector<std::complex<double>> g;
        x.resize(n * n);
        g.resize(n * h);
        auto packed = [&](std::size_t i, std::size_t j) {
            return i <= j ? a(i, j).real() + a(i, j).imag() : a(j, i).real() - a(j, i).imag();
        };
        // B R F = F (P R) F and F R B = F (R P) F with P the index reversal.
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r)
                x[c * n + r] = position ? packed((n - r) % n, c) : packed(r, (n - c) % n);
        fftw_execute_dft_r2c(real_2d_.get(), x.data(), reinterpret_cast<fftw_complex*>(g.data()));
        auto at = [&](std::size_t r, std::size_t c) {
            return r < h ? g[c * h + r] : std::conj(g[((n - c) % n) * h + (n - r)]);
        };
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r <= c; ++r) {
                const std::complex<double> u = at(r, c);
                const std::complex<double> v = at(c, r);
                const std::complex<double> z(0.5 * ((u.real() - u.imag()) + (v.real() - v.imag())),
                                             0.5 * ((u.real() + u.imag()) - (v.real() + v.imag())));
                a(r, c) = z;
                a(c, r) = std::conj(z);
            }
    }

    std::size_t n_;
    detail::PlanHandle real_2d_;
    detail::PlanHandle col_backward_;
    detail::PlanHandle col_forward_;
    detail::PlanHandle row_backward_;
    detail::PlanHandle row_forward_;
};

}  // namespace ratchet
