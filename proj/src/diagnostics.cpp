#include "dlm/diagnostics.hpp"

#include <atomic>

namespace dlm {

namespace {
std::atomic<std::uint64_t> g_divergences{0};
std::atomic<double> g_margin{1e-9};
} // namespace

void note_divergence() { g_divergences.fetch_add(1, std::memory_order_relaxed); }
std::uint64_t divergence_count() { return g_divergences.load(std::memory_order_relaxed); }
void reset_divergence_count() { g_divergences.store(0, std::memory_order_relaxed); }

void set_certifier_margin(double margin) { g_margin.store(margin, std::memory_order_relaxed); }
double certifier_margin() { return g_margin.load(std::memory_order_relaxed); }

} // namespace dlm
