#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ctikit {

/// Every batch kernel has a serial reference path; tests assert both agree.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Calls body(i) for i in [0, n). Iterations must write disjoint outputs.
/// The first exception thrown by any iteration is rethrown after the loop.
template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
    if (exec == Exec::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const long long count = static_cast<long long>(n);
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ctikit
