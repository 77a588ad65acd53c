#include "projlab/monomial.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace projlab {

MonomialSpec::MonomialSpec(int k, const std::vector<Pair>& pairs_one_based) : k_(k) {
  if (k < 1) throw InvalidArgument("monomial: requires k >= 1");
  for (auto [i, j] : pairs_one_based) {
    if (i < 1 || j < 1 || i > k || j > k) {
      throw InvalidArgument("monomial: indices must satisfy 1 <= i, j <= k");
    }
    factors_.emplace_back(std::min(i, j) - 1, std::max(i, j) - 1);
  }
  std::sort(factors_.begin(), factors_.end());
}

MonomialSpec MonomialSpec::parse(int k, const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty() || s == "1") return MonomialSpec(k, {});
  std::vector<Pair> pairs;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t end = std::min(s.find('*', pos), s.size());
    const std::string tok = s.substr(pos, end - pos);
    if (tok.size() < 3 || tok[0] != 'e') throw InvalidArgument("monomial: cannot parse '" + text + "'");
    const std::string body = tok.substr(1);
    const std::size_t sep = body.find('_');
    try {
      if (sep != std::string::npos) {
        pairs.emplace_back(std::stoi(body.substr(0, sep)), std::stoi(body.substr(sep + 1)));
      } else if (body.size() == 2 && std::isdigit(static_cast<unsigned char>(body[0])) &&
                 std::isdigit(static_cast<unsigned char>(body[1]))) {
        pairs.emplace_back(body[0] - '0', body[1] - '0');
      } else {
        throw InvalidArgument("monomial: cannot parse '" + text + "'");
      }
    } catch (const std::logic_error&) {
      throw InvalidArgument("monomial: cannot parse '" + text + "'");
    }
    pos = end + 1;
  }
  return MonomialSpec(k, pairs);
}

MonomialSpec MonomialSpec::open_chain(int k, const std::vector<int>& j_indices) {
  std::vector<Pair> pairs;
  int prev = 0;
  for (int j : j_indices) {
    if (!(prev + 1 < j)) throw InvalidArgument("open chain: requires j_{i-1}+1 < j_i");
    for (int t = prev + 1; t < j; ++t) pairs.emplace_back(t, t + 1);
    prev = j;
  }
  if (prev > k) throw InvalidArgument("open chain: requires j_m <= k");
  return MonomialSpec(k, pairs);
}

MonomialSpec MonomialSpec::closed_chain(int k, int j) {
  if (j < 1 || j > k) throw InvalidArgument("closed chain: requires 1 <= j <= k");
  std::vector<Pair> pairs;
  for (int t = 1; t < j; ++t) pairs.emplace_back(t, t + 1);
  pairs.emplace_back(j, 1);
  return MonomialSpec(k, pairs);
}

int MonomialSpec::max_index() const {
  int m = 0;
  for (auto [i, j] : factors_) m = std::max(m, j + 1);
  return m;
}

std::vector<int> MonomialSpec::indices() const {
  std::set<int> s;
  for (auto [i, j] : factors_) {
    s.insert(i + 1);
    s.insert(j + 1);
  }
  return {s.begin(), s.end()};
}

bool MonomialSpec::has_linear_factor() const {
  std::map<Pair, int> count;
  for (const auto& p : factors_) ++count[p];
  for (const auto& [p, c] : count) {
    if (c == 1) return true;
  }
  return false;
}

double MonomialSpec::evaluate(const Matrix& e) const {
  double prod = 1.0;
  for (auto [i, j] : factors_) prod *= e(i, j);
  return prod;
}

std::string MonomialSpec::to_string() const {
  if (factors_.empty()) return "1";
  const bool wide = k_ > 9;
  std::string out;
  for (std::size_t n = 0; n < factors_.size(); ++n) {
    if (n > 0) out += '*';
    out += 'e' + std::to_string(factors_[n].first + 1) + (wide ? "_" : "") +
           std::to_string(factors_[n].second + 1);
  }
  return out;
}

MonomialSpec relabel(const MonomialSpec& h, const std::vector<int>& perm) {
  std::vector<MonomialSpec::Pair> pairs;
  for (auto [i, j] : h.factors()) pairs.emplace_back(perm.at(i) + 1, perm.at(j) + 1);
  return MonomialSpec(h.k(), pairs);
}

}  // namespace projlab
