#pragma once

#include <exception>
#include <mutex>

namespace invpend {

/// Selects between the OpenMP kernel and its serial reference loop.
enum class Execution { Serial, Parallel };

/// Number of OpenMP threads a Parallel kernel will use (1 without OpenMP).
int parallel_threads();

/// Keeps the first exception thrown inside an OpenMP region so it can be
/// rethrown after the region ends.
class ExceptionSlot {
  public:
    template <class Fn>
    void run(Fn&& fn) noexcept {
        try {
            fn();
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) {
                error_ = std::current_exception();
            }
        }
    }
    void rethrow() const {
        if (error_) {
            std::rethrow_exception(error_);
        }
    }

  private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

}  // namespace invpend
