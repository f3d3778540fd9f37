#include "flx/parallel.hpp"

#include <algorithm>

namespace flx {
namespace {
std::atomic<int> g_workers{1};
}

int worker_count() { return g_workers.load(); }
void set_worker_count(int jobs) { g_workers.store(std::max(1, jobs)); }

}  // namespace flx
