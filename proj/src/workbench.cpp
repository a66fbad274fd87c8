#include "difsi/workbench.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

namespace difsi {

void ForceHistory::append(const Row& row) {
  if (!rows.empty() && !(row.t > rows.back().t)) {
    throw Error("force history times must increase (" + std::to_string(row.t) + " after " +
                std::to_string(rows.back().t) + ")");
  }
  rows.push_back(row);
}

std::vector<double> ForceHistory::times() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.t);
  return v;
}

std::vector<double> ForceHistory::lift() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.cl);
  return v;
}

std::vector<double> ForceHistory::drag() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.cd);
  return v;
}

std::pair<double, double> drag_lift_coefficients(Vec2 force, const FluidConfig& cfg) {
  if (cfg.reference_velocity == 0.0) throw ZeroReferenceVelocity("reference velocity is zero");
  const double q = 0.5 * cfg.density * cfg.reference_velocity * cfg.reference_velocity * cfg.reference_length;
  return {force.x / q, force.y / q};
}

Vec2 body_force(const Vector& dual, const BoundaryMesh& mesh, const GridSpec& grid, const FluidConfig& cfg) {
  if (mesh.empty()) return {};
  // The traction gives the force on the fluid; the body feels the opposite.
  const Vec2 on_fluid = net_force(boundary_traction(dual, grid, mesh), mesh);
  const double scale =
      cfg.density * cfg.reference_velocity * cfg.reference_velocity * cfg.reference_length;
  return {-scale * on_fluid.x, -scale * on_fluid.y};
}

namespace {

std::size_t second_half(std::size_t n) { return n / 2; }

}  // namespace

double strouhal_number(const ForceHistory& history, const FluidConfig& cfg) {
  if (cfg.reference_velocity == 0.0) throw ZeroReferenceVelocity("reference velocity is zero");
  const auto& rows = history.rows;
  const std::size_t first = second_half(rows.size());
  if (rows.size() - first < 3) throw NoOscillationDetected("force history too short");
  double lo = rows[first].cl;
  double hi = rows[first].cl;
  for (std::size_t i = first; i < rows.size(); ++i) {
    lo = std::min(lo, rows[i].cl);
    hi = std::max(hi, rows[i].cl);
  }
  if (0.5 * (hi - lo) < 1e-4) throw NoOscillationDetected("lift amplitude below 1e-4");
  const double mid = 0.5 * (hi + lo);

  std::vector<double> peaks;
  for (std::size_t i = first + 1; i + 1 < rows.size(); ++i) {
    const double a = rows[i - 1].cl;
    const double b = rows[i].cl;
    const double c = rows[i + 1].cl;
    if (b > a && b >= c && b > mid) {
      // Parabola through the three samples (uniform spacing assumed locally).
      const double denom = a - 2.0 * b + c;
      const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
      const double h = 0.5 * (rows[i + 1].t - rows[i - 1].t);
      peaks.push_back(rows[i].t + shift * h);
    }
  }
  if (peaks.size() < 2) throw NoOscillationDetected("fewer than two lift peaks after transient");
  const double period = (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
  return cfg.reference_length / (period * cfg.reference_velocity);
}

ForceStatistics force_statistics(const ForceHistory& history) {
  ForceStatistics s;
  const auto& rows = history.rows;
  const std::size_t first = second_half(rows.size());
  if (first >= rows.size()) return s;
  double cd_lo = rows[first].cd, cd_hi = rows[first].cd;
  double cl_lo = rows[first].cl, cl_hi = rows[first].cl;
  double cd_sum = 0.0, cl_sum = 0.0;
  for (std::size_t i = first; i < rows.size(); ++i) {
    cd_sum += rows[i].cd;
    cl_sum += rows[i].cl;
    cd_lo = std::min(cd_lo, rows[i].cd);
    cd_hi = std::max(cd_hi, rows[i].cd);
    cl_lo = std::min(cl_lo, rows[i].cl);
    cl_hi = std::max(cl_hi, rows[i].cl);
  }
  const auto n = static_cast<double>(rows.size() - first);
  s.mean_cd = cd_sum / n;
  s.mean_cl = cl_sum / n;
  s.cd_amplitude = 0.5 * (cd_hi - cd_lo);
  s.cl_amplitude = 0.5 * (cl_hi - cl_lo);
  return s;
}

double dominant_frequency(const std::vector<double>& signal, double sample_interval) {
  const std::size_t n = signal.size();
  if (n < 4 || !(sample_interval > 0.0)) throw Error("dominant_frequency: need at least 4 samples");
  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(n);
  // Zero-padded DFT, evaluated directly.
  const std::size_t padded = 8 * n;
  double best_f = 0.0;
  double best_power = -1.0;
  for (std::size_t k = 1; k <= padded / 2; ++k) {
    std::complex<double> acc{};
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(padded);
    for (std::size_t i = 0; i < n; ++i) acc += (signal[i] - mean) * std::polar(1.0, w * static_cast<double>(i));
    const double power = std::norm(acc);
    if (power > best_power) {
      best_power = power;
      best_f = static_cast<double>(k) / (static_cast<double>(padded) * sample_interval);
    }
  }
  return best_f;
}

std::vector<double> normalize_to_max(const std::vector<double>& signal) {
  if (signal.empty()) return {};
  const double m = *std::max_element(signal.begin(), signal.end());
  if (!(m > 0.0)) throw Error("cannot normalize a signal whose maximum is not positive");
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = signal[i] / m;
  // Exact unit maximum regardless of rounding in the division.
  out[static_cast<std::size_t>(std::max_element(signal.begin(), signal.end()) - signal.begin())] = 1.0;
  return out;
}

}  // namespace difsi
