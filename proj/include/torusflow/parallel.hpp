#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace torusflow {

/// Collects the first error thrown inside an OpenMP parallel region so it
/// can be rethrown after the region (exceptions must not cross the
/// region boundary).
class ParallelErrorGuard {
public:
    template <class F>
    void protect(F&& body) noexcept {
        try {
            body();
        } catch (const std::exception& e) {
#pragma omp critical(torusflow_parallel_guard)
            if (message_.empty()) message_ = e.what();
        } catch (...) {
#pragma omp critical(torusflow_parallel_guard)
            if (message_.empty()) message_ = "unknown error in parallel region";
        }
    }

    bool failed() const { return !message_.empty(); }

    void rethrow() const {
        if (!message_.empty()) throw std::runtime_error(message_);
    }

private:
    std::string message_;
};

}  // namespace torusflow
