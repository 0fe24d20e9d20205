#pragma once

#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace nslab::detail {

// Serialized access to a per-(dims, n, sign) cache of FFTW plans.
// Plans are created with FFTW_ESTIMATE so the chosen algorithm does not
// depend on runtime timing; outputs are bitwise reproducible.
class FftPlanCache {
  public:
    static FftPlanCache& instance() {
        static FftPlanCache cache;
        return cache;
    }

    // In-place unnormalized c2c transform of an n^dims cube.
    // sign: FFTW_FORWARD (-1) or FFTW_BACKWARD (+1).
    void execute(int dims, int n, std::complex<double>* data, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        Entry& e = entry(dims, n, sign);
        std::memcpy(e.buffer, data, e.count * sizeof(fftw_complex));
        fftw_execute(e.plan);
        std::memcpy(data, e.buffer, e.count * sizeof(fftw_complex));
    }

    FftPlanCache(const FftPlanCache&) = delete;
    FftPlanCache& operator=(const FftPlanCache&) = delete;

  private:
    struct Entry {
        fftw_plan plan = nullptr;
        fftw_complex* buffer = nullptr;
        std::size_t count = 0;
    };

    FftPlanCache() = default;

    ~FftPlanCache() {
        for (auto& [key, e] : entries_) {
            if (e.plan) fftw_destroy_plan(e.plan);
            if (e.buffer) fftw_free(e.buffer);
        }
    }

    Entry& entry(int dims, int n, int sign) {
        auto key = std::make_tuple(dims, n, sign);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;

        std::size_t count = 1;
        for (int d = 0; d < dims; ++d) count *= static_cast<std::size_t>(n);
        Entry e;
        e.count = count;
        e.buffer = static_cast<fftw_complex*>(fftw_malloc(count * sizeof(fftw_complex)));
        if (!e.buffer) throw std::bad_alloc();
        switch (dims) {
            case 1:
                e.plan = fftw_plan_dft_1d(n, e.buffer, e.buffer, sign, FFTW_ESTIMATE);
                break;
            case 2:
                e.plan = fftw_plan_dft_2d(n, n, e.buffer, e.buffer, sign, FFTW_ESTIMATE);
                break;
            case 3:
                e.plan = fftw_plan_dft_3d(n, n, n, e.buffer, e.buffer, sign, FFTW_ESTIMATE);
                break;
            default:
                fftw_free(e.buffer);
                throw std::invalid_argument("fft: dims must be 1, 2 or 3");
        }
        if (!e.plan) {
            fftw_free(e.buffer);
            throw std::runtime_error("fft: plan creation failed");
        }
        return entries_.emplace(key, e).first->second;
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, Entry> entries_;
};

inline void dft(int dims, int n, std::complex<double>* data, int sign) {
    FftPlanCache::instance().execute(dims, n, data, sign);
}

} // namespace nslab::detail
