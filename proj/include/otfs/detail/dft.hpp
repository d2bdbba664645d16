#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "otfs/types.hpp"

namespace otfs::detail {

// FFTW planning is not thread-safe; plans are created once per size under a
// lock and then executed re-entrantly on caller buffers.
class Dft {
public:
    explicit Dft(int n) {
        std::lock_guard<std::mutex> lock(plan_mutex());
        buf_ = fftw_alloc_complex(static_cast<size_t>(n));
        fwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~Dft() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    Dft(const Dft&) = delete;
    Dft& operator=(const Dft&) = delete;

    // X[k] = sum_j x[j] exp(-j 2 pi jk/n), unnormalized.
    void forward(const Complex* in, Complex* out) const {
        fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }
    // x[j] = sum_k X[k] exp(+j 2 pi jk/n), unnormalized.
    void backward(const Complex* in, Complex* out) const {
        fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }

private:
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

inline const Dft& dft(int n) {
    static std::mutex m;
    static std::map<int, std::unique_ptr<Dft>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Dft>(n);
    return *slot;
}

}  // namespace otfs::detail
