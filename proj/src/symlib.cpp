#include "sprint/symlib.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

namespace sprint::symlib {

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw NumericalError("library count overflows uint64");
  return out;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw NumericalError("library count overflows uint64");
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) out = checked_mul(out, n - k + i) / i;
  return out;
}

// All derivative count vectors over `axes` axes with total order `order`.
void count_vectors(int axes, int order, std::vector<int>& current,
                   std::vector<std::vector<int>>& out) {
  const auto d = static_cast<int>(current.size());
  if (d == axes) {
    if (order == 0) out.push_back(current);
    return;
  }
  for (int c = 0; c <= order; ++c) {
    current.push_back(c);
    count_vectors(axes, order - c, current, out);
    current.pop_back();
  }
}

std::string factor_string(const Factor& f, const Alphabet& a) {
  const auto& field = a.fields().at(static_cast<std::size_t>(f.field));
  if (f.order() == 0) return field;
  std::string out = "d";
  for (std::size_t d = 0; d < f.counts.size(); ++d) {
    if (f.counts[d] == 0) continue;
    out += a.derivatives()[d];
    if (f.counts[d] > 1) out += "^" + std::to_string(f.counts[d]);
  }
  return out + "(" + field + ")";
}

int parse_positive(std::string_view digits, std::string_view context) {
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
    throw ConfigError("bad exponent in '" + std::string(context) + "'");
  }
  const int v = std::stoi(std::string(digits));
  if (v < 1) throw ConfigError("bad exponent in '" + std::string(context) + "'");
  return v;
}

}  // namespace

Alphabet::Alphabet(std::vector<std::string> fields, std::vector<std::string> derivatives)
    : fields_(std::move(fields)), derivatives_(std::move(derivatives)) {
  std::set<std::string> seen;
  for (const auto& f : fields_) {
    if (f.empty() || !seen.insert(f).second) throw ConfigError("alphabet: bad or duplicate field '" + f + "'");
  }
  std::set<std::string> axes;
  for (const auto& d : derivatives_) {
    if (d.empty() || !axes.insert(d).second) throw ConfigError("alphabet: bad or duplicate axis '" + d + "'");
    if (seen.count("d" + d)) throw ConfigError("alphabet: derivative d" + d + " collides with a field");
  }
}

std::optional<int> Alphabet::field_index(std::string_view name) const {
  auto it = std::find(fields_.begin(), fields_.end(), name);
  if (it == fields_.end()) return std::nullopt;
  return static_cast<int>(it - fields_.begin());
}

std::optional<int> Alphabet::derivative_index(std::string_view axis) const {
  auto it = std::find(derivatives_.begin(), derivatives_.end(), axis);
  if (it == derivatives_.end()) return std::nullopt;
  return static_cast<int>(it - derivatives_.begin());
}

int Alphabet::add_derivative(const std::string& axis) {
  if (auto i = derivative_index(axis)) return *i;
  derivatives_.push_back(axis);
  return static_cast<int>(derivatives_.size()) - 1;
}

Alphabet Alphabet::mhd() {
  return Alphabet({"u_x", "u_y", "u_z", "B_x", "B_y", "B_z", "rho", "P"}, {"t", "x", "y", "z"});
}

Alphabet Alphabet::scalar_1d() { return Alphabet({"u"}, {"x"}); }

int Factor::order() const { return std::accumulate(counts.begin(), counts.end(), 0); }

SymbolicWord::SymbolicWord(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::sort(factors_.begin(), factors_.end());
}

int SymbolicWord::length() const {
  int n = 0;
  for (const auto& f : factors_) n += f.length();
  return n;
}

std::string to_string(const SymbolicWord& word, const Alphabet& alphabet) {
  if (word.empty()) return "1";
  std::string out;
  const auto& fs = word.factors();
  for (std::size_t i = 0; i < fs.size();) {
    std::size_t j = i;
    while (j < fs.size() && fs[j] == fs[i]) ++j;
    if (!out.empty()) out += "*";
    out += factor_string(fs[i], alphabet);
    if (j - i > 1) out += "^" + std::to_string(j - i);
    i = j;
  }
  return out;
}

SymbolicWord parse_word(std::string_view text, const Alphabet& alphabet) {
  if (text == "1") return SymbolicWord{};
  std::vector<Factor> factors;
  const auto axes = alphabet.derivatives().size();
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto stop = std::min(text.find('*', start), text.size());
    std::string_view piece = text.substr(start, stop - start);
    start = stop + 1;
    if (piece.empty()) throw ConfigError("empty factor in '" + std::string(text) + "'");

    int power = 1;
    Factor f;
    f.counts.assign(axes, 0);
    std::string_view field;
    if (const auto open = piece.find('('); open != std::string_view::npos) {
      const auto close = piece.rfind(')');
      if (piece[0] != 'd' || close == std::string_view::npos || close < open) {
        throw ConfigError("malformed factor '" + std::string(piece) + "'");
      }
      if (close + 1 < piece.size()) {
        if (piece[close + 1] != '^') throw ConfigError("malformed factor '" + std::string(piece) + "'");
        power = parse_positive(piece.substr(close + 2), piece);
      }
      field = piece.substr(open + 1, close - open - 1);
      std::string_view spec = piece.substr(1, open - 1);
      if (spec.empty()) throw ConfigError("derivative without axis in '" + std::string(piece) + "'");
      while (!spec.empty()) {
        // longest axis name that prefixes the remaining spec
        int best = -1;
        std::size_t best_len = 0;
        for (std::size_t d = 0; d < axes; ++d) {
          const auto& name = alphabet.derivatives()[d];
          if (spec.substr(0, name.size()) == name && name.size() > best_len) {
            best = static_cast<int>(d);
            best_len = name.size();
          }
        }
        if (best < 0) throw ConfigError("unknown derivative axis in '" + std::string(piece) + "'");
        spec.remove_prefix(best_len);
        int count = 1;
        if (!spec.empty() && spec[0] == '^') {
          std::size_t n = 1;
          while (n < spec.size() && ::isdigit(static_cast<unsigned char>(spec[n]))) ++n;
          count = parse_positive(spec.substr(1, n - 1), piece);
          spec.remove_prefix(n);
        }
        f.counts[static_cast<std::size_t>(best)] += count;
      }
    } else {
      field = piece;
      if (const auto caret = piece.rfind('^'); caret != std::string_view::npos &&
                                                !alphabet.field_index(piece)) {
        field = piece.substr(0, caret);
        power = parse_positive(piece.substr(caret + 1), piece);
      }
    }
    const auto fi = alphabet.field_index(field);
    if (!fi) throw ConfigError("unknown field '" + std::string(field) + "'");
    f.field = *fi;
    for (int p = 0; p < power; ++p) factors.push_back(f);
    if (stop == text.size()) break;
  }
  return SymbolicWord(std::move(factors));
}

SymbolicWord canonicalize(std::span<const std::string> letters, const Alphabet& alphabet) {
  if (letters.empty()) throw ConfigError("canonicalize: empty letter string");
  std::vector<Factor> factors;
  std::vector<int> pending(alphabet.derivatives().size(), 0);
  bool have_pending = false;
  for (const auto& letter : letters) {
    if (auto fi = alphabet.field_index(letter)) {
      factors.push_back(Factor{*fi, pending});
      std::fill(pending.begin(), pending.end(), 0);
      have_pending = false;
      continue;
    }
    if (letter.size() > 1 && letter[0] == 'd') {
      if (auto di = alphabet.derivative_index(std::string_view(letter).substr(1))) {
        ++pending[static_cast<std::size_t>(*di)];
        have_pending = true;
        continue;
      }
    }
    throw ConfigError("canonicalize: unknown symbol '" + letter + "'");
  }
  if (have_pending) throw DanglingDerivative("dangling derivative");
  return SymbolicWord(std::move(factors));
}

std::vector<SymbolicWord> Library::terms() const {
  std::vector<SymbolicWord> out = extra_terms;
  out.insert(out.end(), words.begin(), words.end());
  return out;
}

std::vector<std::string> Library::labels() const {
  std::vector<std::string> out;
  for (const auto& w : terms()) out.push_back(to_string(w, alphabet));
  return out;
}

void Library::pin(std::string_view text) {
  // Register any axis the pinned term needs before parsing it. Unknown axes
  // are taken one character at a time.
  const auto before = alphabet.derivatives().size();
  std::size_t start = 0;
  while (start < text.size()) {
    const auto stop = std::min(text.find('*', start), text.size());
    const std::string_view piece = text.substr(start, stop - start);
    start = stop + 1;
    const auto open = piece.find('(');
    if (piece.empty() || piece[0] != 'd' || open == std::string_view::npos) continue;
    std::string_view spec = piece.substr(1, open - 1);
    while (!spec.empty()) {
      if (spec[0] == '^' || ::isdigit(static_cast<unsigned char>(spec[0]))) {
        spec.remove_prefix(1);
        continue;
      }
      std::size_t matched = 0;
      for (const auto& name : alphabet.derivatives()) {
        if (spec.substr(0, name.size()) == name) matched = std::max(matched, name.size());
      }
      if (matched == 0) {
        alphabet.add_derivative(std::string(1, spec[0]));
        matched = 1;
      }
      spec.remove_prefix(matched);
    }
  }
  const auto after = alphabet.derivatives().size();
  if (after != before) {
    for (auto* list : {&extra_terms, &words}) {
      for (auto& w : *list) {
        auto factors = w.factors();
        for (auto& f : factors) f.counts.resize(after, 0);
        w = SymbolicWord(std::move(factors));
      }
    }
  }
  auto word = parse_word(text, alphabet);
  for (const auto& existing : terms()) {
    if (existing == word) throw ConfigError("pinned term already in library: " + std::string(text));
  }
  extra_terms.push_back(std::move(word));
}

Library enumerate(const Alphabet& alphabet, int max_length) {
  Library lib;
  lib.alphabet = alphabet;
  lib.max_length = std::max(max_length, 0);
  if (max_length < 1 || alphabet.fields().empty()) return lib;

  const int axes = static_cast<int>(alphabet.derivatives().size());
  std::vector<Factor> types;
  for (int f = 0; f < static_cast<int>(alphabet.fields().size()); ++f) {
    for (int order = 0; order <= max_length - 1; ++order) {
      if (axes == 0 && order > 0) break;
      std::vector<std::vector<int>> vecs;
      std::vector<int> cur;
      count_vectors(axes, order, cur, vecs);
      for (auto& v : vecs) types.push_back(Factor{f, std::move(v)});
    }
  }
  std::sort(types.begin(), types.end());

  // Multisets of factor types as non-decreasing index sequences.
  std::vector<Factor> current;
  std::function<void(std::size_t, int)> extend = [&](std::size_t first, int budget) {
    if (!current.empty()) lib.words.emplace_back(current);
    for (std::size_t t = first; t < types.size(); ++t) {
      if (types[t].length() > budget) continue;
      current.push_back(types[t]);
      extend(t, budget - types[t].length());
      current.pop_back();
    }
  };
  extend(0, max_length);

  std::sort(lib.words.begin(), lib.words.end(), [](const auto& a, const auto& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a < b;
  });
  return lib;
}

std::uint64_t count(const Alphabet& alphabet, int n) {
  if (n < 1) return 0;
  const std::uint64_t fields = alphabet.fields().size();
  const std::uint64_t axes = alphabet.derivatives().size();
  // ways[s] = number of multisets of factors with total length exactly s
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(n) + 1, 0);
  ways[0] = 1;
  for (int len = 1; len <= n; ++len) {
    std::uint64_t types = 0;
    if (axes == 0) types = len == 1 ? fields : 0;
    else types = checked_mul(fields, binomial(static_cast<std::uint64_t>(len - 1) + axes - 1, axes - 1));
    // multiply by (1 - x^len)^(-types), one factor type at a time
    for (std::uint64_t t = 0; t < types; ++t) {
      for (int s = len; s <= n; ++s) ways[s] = checked_add(ways[s], ways[s - len]);
    }
  }
  std::uint64_t total = 0;
  for (int s = 1; s <= n; ++s) total = checked_add(total, ways[s]);
  return total;
}

BoundValue upper_bound(std::uint64_t alphabet_size, int n) {
  if (alphabet_size < 2 || n < 1) throw ConfigError("upper_bound: need |A| >= 2 and n >= 1");
  BoundValue out;
  std::uint64_t power = 1;
  for (int i = 1; i <= n; ++i) {
    if (__builtin_mul_overflow(power, alphabet_size, &power) ||
        __builtin_add_overflow(out.value, power, &out.value)) {
      return {std::numeric_limits<std::uint64_t>::max(), true};
    }
  }
  return out;
}

Library ks_dynamic_library(int max_length) {
  auto lib = enumerate(Alphabet::scalar_1d(), max_length);
  lib.pin("dt(u)");
  return lib;
}

Library ks_spatial_library(int max_length) { return enumerate(Alphabet::scalar_1d(), max_length); }

namespace {

nlohmann::json word_to_json(const SymbolicWord& w, const Alphabet& a) {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : w.factors()) {
    factors.push_back({a.fields()[static_cast<std::size_t>(f.field)], f.counts});
  }
  return {{"label", to_string(w, a)}, {"factors", factors}};
}

SymbolicWord word_from_json(const nlohmann::json& j, const Alphabet& a) {
  std::vector<Factor> factors;
  for (const auto& pair : j.at("factors")) {
    const auto name = pair.at(0).get<std::string>();
    const auto fi = a.field_index(name);
    if (!fi) throw ConfigError("library JSON: unknown field '" + name + "'");
    auto counts = pair.at(1).get<std::vector<int>>();
    if (counts.size() != a.derivatives().size()) throw ConfigError("library JSON: bad derivative counts");
    factors.push_back(Factor{*fi, std::move(counts)});
  }
  return SymbolicWord(std::move(factors));
}

}  // namespace

nlohmann::json library_to_json(const Library& library) {
  nlohmann::json pinned = nlohmann::json::array();
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : library.extra_terms) pinned.push_back(word_to_json(w, library.alphabet));
  for (const auto& w : library.words) words.push_back(word_to_json(w, library.alphabet));
  return {{"alphabet",
           {{"fields", library.alphabet.fields()}, {"derivatives", library.alphabet.derivatives()}}},
          {"max_length", library.max_length},
          {"size", library.size()},
          {"pinned", pinned},
          {"words", words}};
}

Library library_from_json(const nlohmann::json& j) {
  try {
    Library lib;
    lib.alphabet = Alphabet(j.at("alphabet").at("fields").get<std::vector<std::string>>(),
                            j.at("alphabet").at("derivatives").get<std::vector<std::string>>());
    lib.max_length = j.at("max_length").get<int>();
    for (const auto& w : j.value("pinned", nlohmann::json::array())) {
      lib.extra_terms.push_back(word_from_json(w, lib.alphabet));
    }
    for (const auto& w : j.at("words")) lib.words.push_back(word_from_json(w, lib.alphabet));
    return lib;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("library JSON: ") + e.what());
  }
}

void write_library_json(const std::filesystem::path& path, const Library& library) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << library_to_json(library).dump(1) << '\n';
}

Library read_library_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
  try {
    return library_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace sprint::symlib
