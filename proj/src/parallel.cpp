#include "routewise/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace routewise {

unsigned worker_count() {
    if (const char* env = std::getenv("ROUTEWISE_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value > 0) return static_cast<unsigned>(value);
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::size_t chunk = (count + workers - 1) / workers;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(count, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back([&, begin, end] {
                try {
                    for (std::size_t i = begin; i < end; ++i) body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace routewise
