#include "anchorda/parallel.hpp"

#include <atomic>

namespace anchorda {
namespace {
std::atomic<unsigned> g_max_threads{0};
}

void set_max_threads(unsigned threads) { g_max_threads.store(threads); }

unsigned max_threads() {
    const unsigned configured = g_max_threads.load();
    if (configured != 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace anchorda
