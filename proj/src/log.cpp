#include "ppr/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "ppr/types.hpp"

namespace ppr {

namespace log {
namespace {
std::atomic<Level> g_level{Level::Warn};
std::mutex g_mutex;

void emit(Level lvl, const char* tag, const std::string& msg) {
  if (lvl < g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[ppr " << tag << "] " << msg << '\n';
}
}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }
void debug(const std::string& msg) { emit(Level::Debug, "debug", msg); }
void info(const std::string& msg) { emit(Level::Info, "info", msg); }
void warn(const std::string& msg) { emit(Level::Warn, "warn", msg); }
void error(const std::string& msg) { emit(Level::Error, "error", msg); }
}  // namespace log

std::string to_string(Field f) {
  switch (f) {
    case Field::Real: return "real";
    case Field::Complex: return "complex";
    case Field::RealNonnegative: return "real_nonnegative";
  }
  return "complex";
}

Field field_from_string(const std::string& s) {
  if (s == "real") return Field::Real;
  if (s == "complex") return Field::Complex;
  if (s == "real_nonnegative" || s == "nonnegative") return Field::RealNonnegative;
  throw std::invalid_argument("unknown field '" + s + "'");
}

bool SignalVector::conforms() const {
  if (values.size() == 0) return false;
  if (dims && dims->first * dims->second != values.size()) return false;
  for (Index i = 0; i < values.size(); ++i) {
    if (field != Field::Complex && values[i].imag() != 0.0) return false;
    if (field == Field::RealNonnegative && values[i].real() < 0.0) return false;
  }
  return true;
}

void project_to_field(CVec& x, Field field) {
  if (field == Field::Complex) return;
  for (Index i = 0; i < x.size(); ++i) {
    double re = x[i].real();
    if (field == Field::RealNonnegative && re < 0.0) re = 0.0;
    x[i] = Complex(re, 0.0);
  }
}

void restrict_gradient(CVec& g, Field field) {
  if (field == Field::Complex) return;
  g = g.real().cast<Complex>();
}

}  // namespace ppr
