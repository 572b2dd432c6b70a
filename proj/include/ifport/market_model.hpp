#pragma once

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "ifport/error.hpp"
#include "ifport/types.hpp"

namespace ifport {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;        // relative to largest eigenvalue
inline constexpr double kPsdRepairLimit = 1e-6;  // beyond this, not rounding noise

/// Realized per-period returns, one row per period, one column per asset.
struct ReturnSeries {
  std::vector<std::string> labels;
  Matrix observations;  // T x n
};

/// Immutable market data: mean returns, covariance and risk-free rate.
///
/// Construction validates the invariants every downstream module relies on:
/// n >= 2, finite entries, exact symmetry, positive semidefiniteness up to a
/// relative tolerance and strictly positive variances on the diagonal.
class MarketModel {
 public:
  enum class PsdRepair { NearOnly, Always };

  static MarketModel create(std::vector<std::string> labels, Vector mean_returns,
                            Matrix covariance, double risk_free_rate,
                            PsdRepair repair = PsdRepair::NearOnly) {
    const auto n = mean_returns.size();
    if (n < 2) {
      throw Error(ErrorKind::InvariantViolation, "dimension: need at least 2 assets");
    }
    if (covariance.rows() != n || covariance.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch, "covariance must be n x n with n = " +
                                                    std::to_string(n));
    }
    if (labels.empty()) {
      for (Eigen::Index k = 0; k < n; ++k) labels.push_back("A" + std::to_string(k + 1));
    }
    if (static_cast<Eigen::Index>(labels.size()) != n) {
      throw Error(ErrorKind::DimensionMismatch, "label count does not match asset count");
    }
    if (!mean_returns.allFinite() || !covariance.allFinite() ||
        !std::isfinite(risk_free_rate)) {
      throw Error(ErrorKind::NonFiniteInput, "model contains non-finite values");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = i + 1; k < n; ++k) {
        if (std::abs(covariance(i, k) - covariance(k, i)) > kSymmetryTol) {
          throw Error(ErrorKind::InvariantViolation,
                      "symmetry: Q[" + std::to_string(i) + "][" + std::to_string(k) +
                          "] != Q[" + std::to_string(k) + "][" + std::to_string(i) + "]");
        }
      }
    }

    bool repaired = false;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    const double scale = std::max(std::abs(lmax), 1e-300);
    if (lmin < -kPsdTol * scale) {
      if (repair == PsdRepair::NearOnly && lmin < -kPsdRepairLimit * scale) {
        throw Error(ErrorKind::InvariantViolation,
                    "psd: smallest eigenvalue " + std::to_string(lmin));
      }
      Vector clipped = eig.eigenvalues().cwiseMax(0.0);
      Matrix fixed = eig.eigenvectors() * clipped.asDiagonal() *
                     eig.eigenvectors().transpose();
      covariance = 0.5 * (fixed + fixed.transpose());
      repaired = true;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!(covariance(k, k) > 0.0)) {
        throw Error(ErrorKind::InvariantViolation,
                    "diagonal: Q[" + std::to_string(k) + "][" + std::to_string(k) +
                        "] must be positive (asset " + labels[k] + ")");
      }
    }
    return MarketModel(std::move(labels), std::move(mean_returns), std::move(covariance),
                       risk_free_rate, repaired);
  }

  Eigen::Index size() const noexcept { return mean_returns_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Vector& mean_returns() const noexcept { return mean_returns_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  double risk_free_rate() const noexcept { return risk_free_rate_; }
  /// Set when the covariance had to be projected back onto the PSD cone.
  bool repaired() const noexcept { return repaired_; }

 private:
  MarketModel(std::vector<std::string> labels, Vector mean, Matrix cov, double rf,
              bool repaired)
      : labels_(std::move(labels)),
        mean_returns_(std::move(mean)),
        covariance_(std::move(cov)),
        risk_free_rate_(rf),
        repaired_(repaired) {}

  std::vector<std::string> labels_;
  Vector mean_returns_;
  Matrix covariance_;
  double risk_free_rate_ = 0.0;
  bool repaired_ = false;
};

/// Sample mean and sample covariance (divisor T-1) of a return series.
inline MarketModel estimate_model(const ReturnSeries& series, double risk_free_rate) {
  const auto T = series.observations.rows();
  const auto n = series.observations.cols();
  if (T < 2) throw Error(ErrorKind::EmptySeries, "need at least 2 observations");
  if (!series.labels.empty() && static_cast<Eigen::Index>(series.labels.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "label count does not match column count");
  }
  if (!series.observations.allFinite() || !std::isfinite(risk_free_rate)) {
    throw Error(ErrorKind::NonFiniteInput, "series contains non-finite values");
  }

  // Plain loops keep every entry a function of its own columns only, so
  // permuting assets permutes the result exactly.
  Vector mean(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) s += series.observations(t, k);
    mean[k] = s / static_cast<double>(T);
  }
  Matrix cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i; k < n; ++k) {
      double s = 0.0;
      for (Eigen::Index t = 0; t < T; ++t) {
        s += (series.observations(t, i) - mean[i]) * (series.observations(t, k) - mean[k]);
      }
      cov(i, k) = cov(k, i) = s / static_cast<double>(T - 1);
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(cov(k, k) > 0.0)) {
      const std::string name =
          series.labels.empty() ? std::to_string(k) : series.labels[static_cast<size_t>(k)];
      throw Error(ErrorKind::DegenerateAsset, "asset " + name + " has zero sample variance");
    }
  }
  try {
    return MarketModel::create(series.labels, std::move(mean), std::move(cov),
                               risk_free_rate, MarketModel::PsdRepair::Always);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvariantViolation) {
      throw Error(ErrorKind::DegenerateAsset, e.what());
    }
    throw;
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view token, std::string_view where) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorKind::ParseError,
                std::string(where) + ": bad number '" + std::string(token) + "'");
  }
  return value;
}

inline std::vector<double> parse_row(std::string_view line, std::string_view where) {
  std::vector<double> row;
  for (auto tok : split(line, ',')) row.push_back(parse_double(tok, where));
  return row;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses the sectioned model text:
///
///   [assets]          comma-separated labels
///   [mean_returns]    comma-separated decimals
///   [covariance]      n lines of n comma-separated decimals
///   [risk_free_rate]  one decimal
///
/// `#` starts a comment; blank lines are ignored.
inline MarketModel parse_model(std::string_view text) {
  std::vector<std::string> labels;
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
  std::optional<double> rf;
  std::string section;
  bool seen_assets = false, seen_mean = false;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::ParseError, where + ": bad section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "assets" && section != "mean_returns" && section != "covariance" &&
          section != "risk_free_rate") {
        throw Error(ErrorKind::ParseError, where + ": unknown section '" + section + "'");
      }
      continue;
    }
    if (section == "assets") {
      if (seen_assets) throw Error(ErrorKind::ParseError, where + ": assets given twice");
      for (auto tok : detail::split(line, ',')) {
        if (tok.empty()) throw Error(ErrorKind::ParseError, where + ": empty asset label");
        labels.emplace_back(tok);
      }
      seen_assets = true;
    } else if (section == "mean_returns") {
      if (seen_mean) throw Error(ErrorKind::ParseError, where + ": mean_returns given twice");
      mean = detail::parse_row(line, where);
      seen_mean = true;
    } else if (section == "covariance") {
      cov.push_back(detail::parse_row(line, where));
    } else if (section == "risk_free_rate") {
      if (rf) throw Error(ErrorKind::ParseError, where + ": risk_free_rate given twice");
      rf = detail::parse_double(line, where);
    } else {
      throw Error(ErrorKind::ParseError, where + ": data outside of a section");
    }
  }
  if (!seen_assets || !seen_mean || cov.empty() || !rf) {
    throw Error(ErrorKind::ParseError,
                "model needs sections assets, mean_returns, covariance, risk_free_rate");
  }
  const auto n = static_cast<Eigen::Index>(mean.size());
  if (static_cast<Eigen::Index>(labels.size()) != n ||
      static_cast<Eigen::Index>(cov.size()) != n) {
    throw Error(ErrorKind::ParseError, "section sizes disagree: " +
                                           std::to_string(labels.size()) + " assets, " +
                                           std::to_string(mean.size()) + " means, " +
                                           std::to_string(cov.size()) + " covariance rows");
  }
  Matrix q(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(cov[static_cast<size_t>(i)].size()) != n) {
      throw Error(ErrorKind::ParseError,
                  "covariance row " + std::to_string(i) + " has wrong length");
    }
    for (Eigen::Index k = 0; k < n; ++k) q(i, k) = cov[static_cast<size_t>(i)][static_cast<size_t>(k)];
  }
  return MarketModel::create(std::move(labels), Eigen::Map<Vector>(mean.data(), n), std::move(q),
                             *rf);
}

inline MarketModel load_model(const std::string& path) {
  return parse_model(detail::read_file(path));
}

/// Writes the model in the text format read by `parse_model`; numbers use the
/// shortest round-trip representation so reloading is bit-exact.
inline std::string format_model(const MarketModel& model) {
  std::ostringstream out;
  const auto n = model.size();
  out << "[assets]\n";
  for (Eigen::Index k = 0; k < n; ++k) out << (k ? "," : "") << model.labels()[static_cast<size_t>(k)];
  out << "\n\n[mean_returns]\n";
  for (Eigen::Index k = 0; k < n; ++k) out << (k ? "," : "") << detail::format_exact(model.mean_returns()[k]);
  out << "\n\n[covariance]\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      out << (k ? "," : "") << detail::format_exact(model.covariance()(i, k));
    }
    out << "\n";
  }
  out << "\n[risk_free_rate]\n" << detail::format_exact(model.risk_free_rate()) << "\n";
  return out.str();
}

inline void save_model(const MarketModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path);
  out << format_model(model);
}

/// CSV of returns: header row of labels, then one row per period.
inline ReturnSeries parse_returns_csv(std::string_view text) {
  ReturnSeries series;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    if (series.labels.empty()) {
      for (auto tok : detail::split(line, ',')) series.labels.emplace_back(tok);
      continue;
    }
    auto row = detail::parse_row(line, "line " + std::to_string(lineno));
    if (row.size() != series.labels.size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "line " + std::to_string(lineno) + ": expected " +
                      std::to_string(series.labels.size()) + " values");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFiniteInput, "line " + std::to_string(lineno));
      }
    }
    rows.push_back(std::move(row));
  }
  if (series.labels.empty()) throw Error(ErrorKind::EmptySeries, "returns file has no header");
  const auto n = static_cast<Eigen::Index>(series.labels.size());
  series.observations.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (size_t t = 0; t < rows.size(); ++t) {
    for (Eigen::Index k = 0; k < n; ++k) {
      series.observations(static_cast<Eigen::Index>(t), k) = rows[t][static_cast<size_t>(k)];
    }
  }
  return series;
}

inline ReturnSeries load_returns_csv(const std::string& path) {
  return parse_returns_csv(detail::read_file(path));
}

}  // namespace ifport
