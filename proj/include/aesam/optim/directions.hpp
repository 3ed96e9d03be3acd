#pragma once

#include <optional>
#include <string>

#include "aesam/adcore/tensor.hpp"
#include "aesam/errors.hpp"

namespace aesam {

/// normalized: ε = ρ·g/‖g‖.  raw: ε = ρ·g.
enum class PerturbationMode { normalized, raw };

inline std::string to_string(PerturbationMode m) {
  return m == PerturbationMode::normalized ? "normalized" : "raw";
}
inline PerturbationMode perturbation_mode_from_string(const std::string& s) {
  if (s == "normalized") return PerturbationMode::normalized;
  if (s == "raw") return PerturbationMode::raw;
  throw ConfigError("unknown perturbation mode: " + s);
}

inline constexpr double kDegenerateNorm = 1e-12;

/// Ascent perturbation. Empty when normalized mode meets ‖g‖ < 1e-12, in
/// which case the caller takes a plain gradient step.
inline std::optional<ParamSet> sam_perturb(const ParamSet& g, double rho, PerturbationMode mode) {
  if (!(rho > 0.0)) throw ConfigError("sam_perturb: rho must be positive");
  if (mode == PerturbationMode::raw) return tensor_ops::scaled(g, rho);
  const double n = tensor_ops::norm(g);
  if (n < kDegenerateNorm) return std::nullopt;
  return tensor_ops::scaled(g, rho / n);
}

/// g_v = g_s − (gᵀg_s / ‖g‖²)·g. Empty when ‖g‖ < 1e-12.
inline std::optional<ParamSet> looksam_decompose(const ParamSet& g, const ParamSet& g_s) {
  const double gg = tensor_ops::squared_norm(g);
  if (std::sqrt(gg) < kDegenerateNorm) return std::nullopt;
  const double coef = tensor_ops::dot(g, g_s) / gg;
  return tensor_ops::add_scaled(g_s, -coef, g);
}

/// g + α·(‖g‖/‖g_v‖)·g_v; plain g when ‖g_v‖ < 1e-12.
inline ParamSet looksam_compose(const ParamSet& g, const ParamSet& g_v, double alpha) {
  const double nv = tensor_ops::norm(g_v);
  if (nv < kDegenerateNorm) return g;
  return tensor_ops::add_scaled(g, alpha * tensor_ops::norm(g) / nv, g_v);
}

} // namespace aesam
