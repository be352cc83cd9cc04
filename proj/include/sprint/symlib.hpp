#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sprint/error.hpp"

namespace sprint::symlib {

/// Field symbols plus derivative axes. A derivative letter is written
/// "d" + axis ("dt", "dx"); its position in `derivatives` fixes the
/// canonical order of derivatives acting on one field.
class Alphabet {
 public:
  Alphabet() = default;
  Alphabet(std::vector<std::string> fields, std::vector<std::string> derivatives);

  const std::vector<std::string>& fields() const { return fields_; }
  const std::vector<std::string>& derivatives() const { return derivatives_; }
  std::size_t size() const { return fields_.size() + derivatives_.size(); }

  std::optional<int> field_index(std::string_view name) const;
  std::optional<int> derivative_index(std::string_view axis) const;

  /// Returns the index of `axis`, appending it if absent.
  int add_derivative(const std::string& axis);

  /// Eight ideal-MHD fields and four spacetime derivatives.
  static Alphabet mhd();
  /// Single field u with one spatial derivative.
  static Alphabet scalar_1d();

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<std::string> fields_;
  std::vector<std::string> derivatives_;
};

/// One differentiated field: `counts[d]` derivatives along axis d.
struct Factor {
  int field = 0;
  std::vector<int> counts;

  int order() const;
  int length() const { return 1 + order(); }
  auto operator<=>(const Factor&) const = default;
};

/// Canonical product of factors, sorted by (field, derivative counts).
class SymbolicWord {
 public:
  SymbolicWord() = default;
  explicit SymbolicWord(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  int length() const;
  bool empty() const { return factors_.empty(); }

  auto operator<=>(const SymbolicWord&) const = default;

 private:
  std::vector<Factor> factors_;
};

/// Thrown by canonicalize for a letter string ending in a derivative.
class DanglingDerivative : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Display form, e.g. "u^2*dx(u)", "dx^3(u)", "dtdx(u_x)"; "1" for the
/// empty word.
std::string to_string(const SymbolicWord& word, const Alphabet& alphabet);
/// Inverse of to_string.
SymbolicWord parse_word(std::string_view text, const Alphabet& alphabet);

/// Raw letters (field names and "d"+axis tokens) to canonical form. Each
/// maximal run of derivatives binds to the next field.
SymbolicWord canonicalize(std::span<const std::string> letters, const Alphabet& alphabet);

struct Library {
  Alphabet alphabet;
  int max_length = 0;
  /// Terms included outside the enumeration (listed first as columns).
  std::vector<SymbolicWord> extra_terms;
  std::vector<SymbolicWord> words;

  std::size_t size() const { return extra_terms.size() + words.size(); }
  std::vector<SymbolicWord> terms() const;
  std::vector<std::string> labels() const;

  /// Pin a term given in display form; derivative axes it uses that the
  /// alphabet lacks are appended.
  void pin(std::string_view text);
};

/// Every distinct canonical word with 1 <= length <= max_length, ordered by
/// length then canonical order.
Library enumerate(const Alphabet& alphabet, int max_length);

/// |enumerate(alphabet, n)| by a generating-function count (no enumeration).
std::uint64_t count(const Alphabet& alphabet, int n);

struct BoundValue {
  std::uint64_t value = 0;
  bool saturated = false;  // true when the exact value exceeds uint64
};
/// |A| (|A|^n - 1) / (|A| - 1).
BoundValue upper_bound(std::uint64_t alphabet_size, int n);

/// {dt(u)} together with all words over {u, dx} up to `max_length`.
Library ks_dynamic_library(int max_length = 10);
/// Same without the time derivative.
Library ks_spatial_library(int max_length = 10);

nlohmann::json library_to_json(const Library& library);
Library library_from_json(const nlohmann::json& j);
void write_library_json(const std::filesystem::path& path, const Library& library);
Library read_library_json(const std::filesystem::path& path);

}  // namespace sprint::symlib
