#include "tvlevel/anisotropy.hpp"

#include <json.hpp>

namespace tvlevel {

using nlohmann::json;

const char* to_string(NormKind k) {
  switch (k) {
    case NormKind::Euclidean: return "euclidean";
    case NormKind::WeightedL2: return "weighted_l2";
    case NormKind::Lp: return "lp";
    case NormKind::L1: return "l1";
    case NormKind::Linf: return "linf";
  }
  return "?";
}

Anisotropy Anisotropy::weighted_l2(const Mat2& m) {
  if (!m.spd()) throw std::invalid_argument("weighted_l2: matrix must be SPD");
  Anisotropy a(NormKind::WeightedL2);
  a.m_ = m;
  return a;
}

Anisotropy Anisotropy::lp(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("lp: exponent must be finite and > 1");
  Anisotropy a(NormKind::Lp);
  a.p_ = p;
  return a;
}

bool Anisotropy::squared_strongly_convex() const {
  switch (kind_) {
    case NormKind::Euclidean:
    case NormKind::WeightedL2:
      return true;
    case NormKind::Lp:
      // the squared lp norm is 2-uniformly convex only for p <= 2
      return p_ <= 2.0;
    default:
      return false;
  }
}

double Anisotropy::eval(Vec2 v) const {
  switch (kind_) {
    case NormKind::Euclidean:
      return std::hypot(v.x, v.y);
    case NormKind::WeightedL2:
      return std::sqrt(m_.quad(v));
    case NormKind::Lp: {
      const double ax = std::abs(v.x), ay = std::abs(v.y);
      const double m = std::max(ax, ay);
      if (m == 0.0) return 0.0;
      // scale out the max to avoid overflow/underflow in pow
      return m * std::pow(std::pow(ax / m, p_) + std::pow(ay / m, p_), 1.0 / p_);
    }
    case NormKind::L1:
      return std::abs(v.x) + std::abs(v.y);
    case NormKind::Linf:
      return std::max(std::abs(v.x), std::abs(v.y));
  }
  return 0.0;
}

Anisotropy Anisotropy::polar() const {
  switch (kind_) {
    case NormKind::Euclidean:
      return euclidean();
    case NormKind::WeightedL2:
      return weighted_l2(m_.inverse());
    case NormKind::Lp:
      return lp(p_ / (p_ - 1.0));
    case NormKind::L1:
      return linf();
    case NormKind::Linf:
      return l1();
  }
  return euclidean();
}

Vec2 Anisotropy::grad(Vec2 v) const {
  if (crystalline())
    throw capability_error("grad: undefined for crystalline norms");
  if (v.x == 0.0 && v.y == 0.0)
    throw std::domain_error("grad: zero vector");
  switch (kind_) {
    case NormKind::Euclidean: {
      const double n = std::hypot(v.x, v.y);
      return {v.x / n, v.y / n};
    }
    case NormKind::WeightedL2: {
      const double n = std::sqrt(m_.quad(v));
      return (1.0 / n) * m_.apply(v);
    }
    case NormKind::Lp: {
      const double n = eval(v);
      auto comp = [&](double t) {
        if (t == 0.0) return 0.0;
        const double s = t < 0 ? -1.0 : 1.0;
        return s * std::pow(std::abs(t) / n, p_ - 1.0);
      };
      return {comp(v.x), comp(v.y)};
    }
    default:
      return {};
  }
}

std::pair<double, double> Anisotropy::equivalence_constants() const {
  switch (kind_) {
    case NormKind::Euclidean:
      return {1.0, 1.0};
    case NormKind::WeightedL2: {
      auto [lo, hi] = m_.eigenvalues();
      return {std::sqrt(lo), std::sqrt(hi)};
    }
    case NormKind::Lp: {
      const double c = std::pow(2.0, 1.0 / p_ - 0.5);
      return {std::min(1.0, c), std::max(1.0, c)};
    }
    case NormKind::L1:
      return {1.0, std::sqrt(2.0)};
    case NormKind::Linf:
      return {std::sqrt(0.5), 1.0};
  }
  return {1.0, 1.0};
}

Anisotropy Anisotropy::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("anisotropy: bad JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("anisotropy: descriptor must be an object with a \"kind\"");
  for (auto& [key, val] : j.items()) {
    (void)val;
    if (key != "kind" && key != "matrix" && key != "p")
      throw std::invalid_argument("anisotropy: unknown key \"" + key + "\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "euclidean") return euclidean();
  if (kind == "l1") return l1();
  if (kind == "linf") return linf();
  if (kind == "lp") {
    if (!j.contains("p")) throw std::invalid_argument("anisotropy: lp needs \"p\"");
    return lp(j.at("p").get<double>());
  }
  if (kind == "weighted_l2") {
    if (!j.contains("matrix")) throw std::invalid_argument("anisotropy: weighted_l2 needs \"matrix\"");
    const auto& m = j.at("matrix");
    if (!m.is_array() || m.size() != 2 || !m[0].is_array() || m[0].size() != 2 ||
        !m[1].is_array() || m[1].size() != 2)
      throw std::invalid_argument("anisotropy: matrix must be 2x2");
    const double m11 = m[0][0].get<double>(), m12 = m[0][1].get<double>();
    const double m21 = m[1][0].get<double>(), m22 = m[1][1].get<double>();
    if (m12 != m21) throw std::invalid_argument("anisotropy: matrix must be symmetric");
    Mat2 mat{m11, m12, m22};
    if (!mat.spd()) throw std::invalid_argument("anisotropy: matrix must be SPD");
    return weighted_l2(mat);
  }
  throw std::invalid_argument("anisotropy: unknown kind \"" + kind + "\"");
}

std::string Anisotropy::to_json_text() const {
  json j;
  j["kind"] = to_string(kind_);
  if (kind_ == NormKind::WeightedL2)
    j["matrix"] = {{m_.a11, m_.a12}, {m_.a12, m_.a22}};
  if (kind_ == NormKind::Lp) j["p"] = p_;
  return j.dump();
}

}  // namespace tvlevel
