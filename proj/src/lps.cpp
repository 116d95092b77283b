#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "ramcut/error.hpp"
#include "ramcut/graph.hpp"

namespace ramcut {

bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  for (std::uint64_t f = 2; f * f <= x; ++f) {
    if (x % f == 0) return false;
  }
  return true;
}

namespace {

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  unsigned __int128 result = 1, b = base % mod;
  while (exp > 0) {
    if (exp & 1) result = result * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t reduce(std::int64_t a, std::uint64_t q) {
  const auto m = static_cast<std::int64_t>(q);
  return static_cast<std::uint64_t>(((a % m) + m) % m);
}

// 2x2 matrix over F_q, stored row-major.
using Mat = std::array<std::uint64_t, 4>;

Mat multiply(const Mat& x, const Mat& y, std::uint64_t q) {
  return {(x[0] * y[0] + x[1] * y[2]) % q, (x[0] * y[1] + x[1] * y[3]) % q,
          (x[2] * y[0] + x[3] * y[2]) % q, (x[2] * y[1] + x[3] * y[3]) % q};
}

// Representative of the projective class: first nonzero entry scaled to 1.
Mat normalize(Mat m, std::uint64_t q) {
  for (auto entry : m) {
    if (entry != 0) {
      const auto inv = pow_mod(entry, q - 2, q);
      for (auto& e : m) e = e * inv % q;
      return m;
    }
  }
  throw Error("lps: zero matrix");
}

std::uint64_t encode(const Mat& m, std::uint64_t q) {
  return ((m[0] * q + m[1]) * q + m[2]) * q + m[3];
}

}  // namespace

int legendre_symbol(std::int64_t a, std::uint64_t p) {
  const auto r = reduce(a, p);
  if (r == 0) return 0;
  return pow_mod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

Graph build_lps(std::uint64_t p, std::uint64_t q) {
  if (!is_prime(p)) throw Error("lps: p=" + std::to_string(p) + " is not prime");
  if (!is_prime(q)) throw Error("lps: q=" + std::to_string(q) + " is not prime");
  if (p == q) throw Error("lps: p and q must differ");
  if (p % 4 != 1) throw Error("lps: p=" + std::to_string(p) + " is not 1 mod 4");
  if (q % 4 != 1) throw Error("lps: q=" + std::to_string(q) + " is not 1 mod 4");
  if (q * q <= 4 * p) throw Error("lps: need q > 2 sqrt(p)");
  if (q > 200) throw Error("lps: q=" + std::to_string(q) + " exceeds the supported size (q <= 200)");

  // Square root of -1 mod q.
  std::uint64_t iota = 0;
  for (std::uint64_t x = 2; x < q; ++x) {
    if (x * x % q == q - 1) {
      iota = x;
      break;
    }
  }

  // Quaternions of norm p with a0 odd and positive; a1..a3 are then even.
  std::vector<Mat> gens;
  const auto bound = static_cast<std::int64_t>(std::sqrt(static_cast<double>(p))) + 1;
  const auto pp = static_cast<std::int64_t>(p);
  for (std::int64_t a0 = 1; a0 <= bound; a0 += 2) {
    for (std::int64_t a1 = -bound; a1 <= bound; ++a1) {
      for (std::int64_t a2 = -bound; a2 <= bound; ++a2) {
        for (std::int64_t a3 = -bound; a3 <= bound; ++a3) {
          if (a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3 != pp) continue;
          if (a1 % 2 != 0 || a2 % 2 != 0 || a3 % 2 != 0) continue;
          const auto i = static_cast<std::int64_t>(iota);
          gens.push_back(normalize({reduce(a0 + i * a1, q), reduce(a2 + i * a3, q),
                                    reduce(-a2 + i * a3, q), reduce(a0 - i * a1, q)},
                                   q));
        }
      }
    }
  }
  if (gens.size() != p + 1) {
    throw Error("lps: found " + std::to_string(gens.size()) + " generators, expected " +
                std::to_string(p + 1));
  }

  // Breadth-first enumeration of the subgroup of PGL(2, q) generated by the
  // generators: PSL(2, q) when p is a square mod q, PGL(2, q) otherwise.
  const bool bipartite = legendre_symbol(static_cast<std::int64_t>(p), q) == -1;
  const std::size_t expected = bipartite ? q * (q * q - 1) : q * (q * q - 1) / 2;
  std::unordered_map<std::uint64_t, Vertex> index;
  std::vector<Mat> elements{{1, 0, 0, 1}};
  index.emplace(encode(elements[0], q), 0);
  std::vector<Edge> edges;
  for (std::size_t head = 0; head < elements.size(); ++head) {
    const Mat x = elements[head];
    for (const auto& s : gens) {
      const Mat y = normalize(multiply(x, s, q), q);
      auto [it, fresh] = index.try_emplace(encode(y, q), static_cast<Vertex>(elements.size()));
      if (fresh) elements.push_back(y);
      const auto u = static_cast<Vertex>(head);
      if (u < it->second) edges.push_back({u, it->second});
      if (u == it->second) throw Error("lps: generator acts trivially (self-loop)");
    }
  }
  if (elements.size() != expected) {
    throw Error("lps: generated group has " + std::to_string(elements.size()) +
                " elements, expected " + std::to_string(expected));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g(elements.size(), std::move(edges),
          "lps(p=" + std::to_string(p) + ",q=" + std::to_string(q) + ")");
  if (g.regular_degree() != p + 1) {
    throw Error("lps: degree audit failed (multi-edges among generators)");
  }
  return g;
}

}  // namespace ramcut
