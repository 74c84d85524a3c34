#pragma once

#include <complex>
#include <vector>

#include "euler2d/errors.hpp"
#include "euler2d/parallel.hpp"

namespace euler2d {

/// Iterative radix-2 complex FFT for power-of-two sizes, with precomputed
/// twiddles and bit-reversal permutation. Unnormalized forward transform
/// A_k = sum_j a_j exp(-2 pi i jk / n); inverse scales by 1/n.
class Fft {
public:
    explicit Fft(int n) : n_(n) {
        if (n < 1 || (n & (n - 1)) != 0)
            throw ConfigError("Fft: size must be a power of two");
        rev_.resize(n);
        int lg = 0;
        while ((1 << lg) < n) ++lg;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < lg; ++b)
                if (i & (1 << b)) r |= 1 << (lg - 1 - b);
            rev_[i] = r;
        }
        tw_.resize(n / 2);
        for (int i = 0; i < n / 2; ++i) {
            const double ang = -2.0 * 3.14159265358979323846 * i / n;
            tw_[i] = {std::cos(ang), std::sin(ang)};
        }
    }

    int size() const { return n_; }

    void forward(std::complex<double>* a) const { transform(a, false); }

    void inverse(std::complex<double>* a) const {
        transform(a, true);
        const double s = 1.0 / n_;
        for (int i = 0; i < n_; ++i) a[i] *= s;
    }

private:
    void transform(std::complex<double>* a, bool inv) const {
        for (int i = 0; i < n_; ++i) {
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        }
        for (int len = 2; len <= n_; len <<= 1) {
            const int half = len >> 1;
            const int step = n_ / len;
            for (int i = 0; i < n_; i += len) {
                for (int j = 0; j < half; ++j) {
                    std::complex<double> w = tw_[j * step];
                    if (inv) w = std::conj(w);
                    const std::complex<double> u = a[i + j];
                    const std::complex<double> v = a[i + j + half] * w;
                    a[i + j] = u + v;
                    a[i + j + half] = u - v;
                }
            }
        }
    }

    int n_;
    std::vector<int> rev_;
    std::vector<std::complex<double>> tw_;
};

/// In-place 2D transform of an n*n array stored row-major (x fastest).
/// Rows and columns are independent, so the parallel map is deterministic;
/// small transforms stay serial (thread spawn would dominate).
inline void fft2d(const Fft& fft, std::complex<double>* a, bool forward) {
    const int n = fft.size();
    const unsigned threads = n < 128 ? 1 : 0;
    parallel_for(
        static_cast<std::size_t>(n),
        [&](std::size_t j) {
            std::complex<double>* row = a + j * n;
            if (forward)
                fft.forward(row);
            else
                fft.inverse(row);
        },
        threads);
    parallel_for(
        static_cast<std::size_t>(n),
        [&](std::size_t i) {
            std::vector<std::complex<double>> col(n);
            for (int j = 0; j < n; ++j) col[j] = a[static_cast<std::size_t>(j) * n + i];
            if (forward)
                fft.forward(col.data());
            else
                fft.inverse(col.data());
            for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(j) * n + i] = col[j];
        },
        threads);
}

} // namespace euler2d
