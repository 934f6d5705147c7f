#pragma once

// Text formats: coefficient files (exact or with a stddev column),
// per-prime checkpoints, run manifests and the approximant archive.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stacksort/diffapprox/approximant.hpp"
#include "stacksort/numeric.hpp"
#include "stacksort/series_core.hpp"

namespace stacksort::io {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kCoeffMagic = "stacksort-coeffs";

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contents of a coefficient file. Exact files fill `exact`; approximate
/// files fill `approx` and `stddev` (exact rows carry stddev 0).
struct SeriesFile {
  std::size_t n = 0;
  Provenance provenance = Provenance::exact_uncertified;
  std::vector<BigInt> exact;
  std::vector<Real> approx;
  std::vector<Real> stddev;
  std::size_t exact_prefix = 0;  // rows known exactly

  bool is_exact() const { return stacksort::is_exact(provenance); }

  CoefficientSeries series(const std::string& name = "3-stack-sortable") const {
    if (!is_exact()) throw FormatError("coefficient file is approximate; exact coefficients required");
    return {name, exact, provenance};
  }

  /// Values in working precision regardless of provenance.
  std::vector<Real> reals() const {
    if (!is_exact()) return approx;
    std::vector<Real> out;
    for (const auto& c : exact) out.push_back(to_real(c));
    return out;
  }
};

inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string coefficient_header(std::size_t n, Provenance p) {
  return std::string(kCoeffMagic) + " v1 N=" + std::to_string(n) + " provenance=" + to_string(p);
}

inline std::string format_coefficients(const CoefficientSeries& s) {
  std::ostringstream os;
  os << coefficient_header(s.size(), s.provenance) << '\n';
  for (std::size_t n = 1; n <= s.size(); ++n) os << n << ' ' << s.at(n) << '\n';
  return os.str();
}

inline void write_coefficients(const std::filesystem::path& path, const CoefficientSeries& s) {
  atomic_write(path, format_coefficients(s));
}

/// Approximate file: `n value stddev` rows; the first `exact` rows are
/// written as integers with stddev 0.
inline void write_extended(const std::filesystem::path& path, const std::vector<BigInt>& exact,
                           const std::vector<Real>& values, const std::vector<Real>& stddev, int digits) {
  std::ostringstream os;
  os << coefficient_header(exact.size() + values.size(), Provenance::approximate) << '\n';
  std::size_t n = 1;
  for (const auto& c : exact) os << n++ << ' ' << c << " 0\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    os << n++ << ' ' << to_sci(values[i], digits) << ' ' << to_sci(stddev[i], 6) << '\n';
  atomic_write(path, os.str());
}

inline std::string header_field(const std::string& header, const std::string& key) {
  std::istringstream is(header);
  std::string tok;
  while (is >> tok)
    if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
  throw FormatError("header lacks " + key + "=: '" + header + "'");
}

inline SeriesFile read_coefficients(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string header;
  if (!std::getline(in, header) || header.rfind(kCoeffMagic, 0) != 0)
    throw FormatError(path.string() + ": not a coefficient file");
  SeriesFile f;
  f.n = std::stoul(header_field(header, "N"));
  f.provenance = provenance_from_string(header_field(header, "provenance"));
  std::string line;
  std::size_t expect = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t n = 0;
    std::string value, sd;
    if (!(ls >> n >> value)) throw FormatError(path.string() + ": malformed line '" + line + "'");
    ls >> sd;
    if (n != expect) throw FormatError(path.string() + ": expected n=" + std::to_string(expect) + ", got " + std::to_string(n));
    ++expect;
    if (f.is_exact()) {
      try {
        f.exact.emplace_back(value);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ": non-integer coefficient at n=" + std::to_string(n));
      }
      ++f.exact_prefix;
    } else {
      f.approx.emplace_back(value);
      f.stddev.emplace_back(sd.empty() ? std::string("0") : sd);
      if (f.exact_prefix + 1 == n && f.stddev.back() == 0 && value.find_first_of(".eE") == std::string::npos)
        ++f.exact_prefix;
    }
  }
  if (expect - 1 != f.n)
    throw FormatError(path.string() + ": header says N=" + std::to_string(f.n) + " but file has " + std::to_string(expect - 1) + " rows");
  return f;
}

/// Exact integer rows of an approximate file (its exact prefix).
inline std::vector<BigInt> exact_rows(const std::filesystem::path& path, std::size_t count) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<BigInt> out;
  while (out.size() < count && std::getline(in, line)) {
    std::istringstream ls(line);
    std::size_t n;
    std::string v;
    ls >> n >> v;
    out.emplace_back(v);
  }
  return out;
}

// Checkpoints.

inline std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint32_t p, std::size_t n) {
  return dir / ("prime-" + std::to_string(p) + "-N" + std::to_string(n) + ".txt");
}

inline void write_checkpoint(const std::filesystem::path& dir, std::uint32_t p, std::size_t n,
                             const std::vector<std::uint32_t>& residues) {
  std::ostringstream os;
  os << "prime=" << p << " N=" << n << '\n';
  for (std::size_t i = 0; i < residues.size(); ++i) os << i + 1 << ' ' << residues[i] << '\n';
  atomic_write(checkpoint_path(dir, p, n), os.str());
}

/// Residues from a complete, well-formed checkpoint for (p, n); nullopt
/// when missing or unusable.
inline std::optional<std::vector<std::uint32_t>> read_checkpoint(const std::filesystem::path& dir, std::uint32_t p,
                                                                 std::size_t n) {
  std::filesystem::path path = checkpoint_path(dir, p, n);
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::istringstream in(read_text(path));
  std::string header;
  if (!std::getline(in, header)) return std::nullopt;
  try {
    if (std::stoul(header_field(header, "prime")) != p || std::stoul(header_field(header, "N")) != n) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  std::vector<std::uint32_t> r;
  std::size_t idx;
  std::uint64_t v;
  while (in >> idx >> v) {
    if (idx != r.size() + 1 || v >= p) return std::nullopt;
    r.push_back(static_cast<std::uint32_t>(v));
  }
  if (r.size() != n) return std::nullopt;
  return r;
}

// Manifest.

using Json = nlohmann::ordered_json;

/// FNV-1a over the canonical JSON text.
inline std::string config_hash(const Json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  std::string s = os.str();
  return std::string(16 - s.size(), '0') + s;
}

inline Json certification_json(const CertificationReport& r) {
  return Json{{"N", r.n},
              {"product_P_log10", log10_big(r.product)},
              {"max_coefficient_log10", r.max_coefficient > 0 ? log10_big(r.max_coefficient) : 0.0},
              {"passed", r.passed},
              {"log10_margin", r.log10_margin}};
}

inline void write_manifest(const std::filesystem::path& path, const Json& manifest) {
  atomic_write(path, manifest.dump(2) + "\n");
}

inline Json read_manifest(const std::filesystem::path& path) { return Json::parse(read_text(path)); }

// Approximant archive.

inline std::string rational_pair(const BigRational& q) {
  return boost::multiprecision::numerator(q).str() + " " + boost::multiprecision::denominator(q).str();
}

/// One block per approximant: `order M`, `degrees d_0 .. d_M L`,
/// `scale num den`, then one line per polynomial Q_0..Q_M, P listing
/// coefficients as `num den` pairs (in the scaled variable). Floating fits
/// are archived through the exact binary value of each coefficient.
inline std::string format_approximant(const da::HolonomicApproximant& ap) {
  std::ostringstream os;
  os << "order " << ap.spec.order << '\n' << "degrees";
  for (int d : ap.spec.q_degrees) os << ' ' << d;
  os << ' ' << ap.spec.p_degree << '\n';
  os << "scale " << rational_pair(exact_rational(ap.scale)) << '\n';
  auto emit = [&](const std::vector<Real>& poly, const std::vector<BigRational>* exact) {
    for (std::size_t m = 0; m < poly.size(); ++m) {
      if (m) os << ' ';
      os << rational_pair(exact ? (*exact)[m] : exact_rational(poly[m]));
    }
    os << '\n';
  };
  for (std::size_t k = 0; k < ap.q.size(); ++k) emit(ap.q[k], ap.exact ? &ap.q_exact[k] : nullptr);
  emit(ap.p, ap.exact ? &ap.p_exact : nullptr);
  return os.str();
}

inline void write_approximant_archive(const std::filesystem::path& path,
                                      const std::vector<const da::HolonomicApproximant*>& aps) {
  std::ostringstream os;
  os << "stacksort-approximants v1 count=" << aps.size() << '\n';
  for (const auto* ap : aps) os << format_approximant(*ap) << '\n';
  atomic_write(path, os.str());
}

}  // namespace stacksort::io
