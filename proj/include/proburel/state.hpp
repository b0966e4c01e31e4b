#ifndef PROBUREL_STATE_HPP
#define PROBUREL_STATE_HPP

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proburel/rational.hpp"

namespace proburel {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an assignment writes a value outside the variable's domain.
struct OutOfDomain : std::runtime_error {
  OutOfDomain(std::string var, long long val)
      : std::runtime_error("value " + std::to_string(val) + " out of domain of '" + var + "'"),
        var(std::move(var)),
        val(val) {}
  std::string var;
  long long val;
};

enum class DomainKind { boolean, int_range, enumeration };

/// A finite carrier for one variable. Values are canonically encoded as
/// integers: booleans as 0/1, ranges by the integer itself, enumerations
/// by label index.
class Domain {
 public:
  static Domain boolean() {
    Domain d;
    d.kind_ = DomainKind::boolean;
    d.lo_ = 0;
    d.hi_ = 1;
    return d;
  }

  static Domain int_range(long long lo, long long hi) {
    if (lo > hi) throw DomainError("empty integer range");
    Domain d;
    d.kind_ = DomainKind::int_range;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }

  static Domain enumeration(std::vector<std::string> labels) {
    if (labels.empty()) throw DomainError("empty enumeration");
    for (size_t i = 0; i < labels.size(); ++i)
      for (size_t j = i + 1; j < labels.size(); ++j)
        if (labels[i] == labels[j]) throw DomainError("duplicate enum label '" + labels[i] + "'");
    Domain d;
    d.kind_ = DomainKind::enumeration;
    d.lo_ = 0;
    d.hi_ = static_cast<long long>(labels.size()) - 1;
    d.labels_ = std::move(labels);
    return d;
  }

  DomainKind kind() const { return kind_; }
  size_t size() const { return static_cast<size_t>(hi_ - lo_ + 1); }
  long long lo() const { return lo_; }
  long long hi() const { return hi_; }

  bool contains(long long v) const { return v >= lo_ && v <= hi_; }
  long long value_at(size_t idx) const { return lo_ + static_cast<long long>(idx); }
  size_t index_of(long long v) const { return static_cast<size_t>(v - lo_); }

  std::string value_name(long long v) const {
    switch (kind_) {
      case DomainKind::boolean:
        return v ? "true" : "false";
      case DomainKind::int_range:
        return std::to_string(v);
      case DomainKind::enumeration:
        return labels_.at(static_cast<size_t>(v));
    }
    return {};
  }

  std::optional<long long> parse_value(std::string_view token) const {
    switch (kind_) {
      case DomainKind::boolean:
        if (token == "true") return 1;
        if (token == "false") return 0;
        return std::nullopt;
      case DomainKind::int_range: {
        try {
          size_t pos = 0;
          long long v = std::stoll(std::string(token), &pos);
          if (pos != token.size()) return std::nullopt;
          return contains(v) ? std::optional<long long>(v) : std::nullopt;
        } catch (...) {
          return std::nullopt;
        }
      }
      case DomainKind::enumeration:
        for (size_t i = 0; i < labels_.size(); ++i)
          if (labels_[i] == token) return static_cast<long long>(i);
        return std::nullopt;
    }
    return std::nullopt;
  }

  /// Index of a label in an enumeration, if present.
  std::optional<long long> label_value(std::string_view label) const {
    if (kind_ != DomainKind::enumeration) return std::nullopt;
    for (size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return static_cast<long long>(i);
    return std::nullopt;
  }

  bool operator==(const Domain& o) const {
    return kind_ == o.kind_ && lo_ == o.lo_ && hi_ == o.hi_ && labels_ == o.labels_;
  }

 private:
  Domain() = default;
  DomainKind kind_ = DomainKind::boolean;
  long long lo_ = 0, hi_ = 0;
  std::vector<std::string> labels_;
};

/// Dense state index; lexicographic by declaration order.
using StateId = uint32_t;

class State;

/// An ordered alphabet of finite-domain variables. The full state space is
/// the product of the domains, enumerable and indexable.
class StateSpace : public std::enable_shared_from_this<StateSpace> {
 public:
  static std::shared_ptr<const StateSpace> make(std::vector<std::pair<std::string, Domain>> decls) {
    if (decls.empty()) throw DomainError("state space needs at least one variable");
    for (size_t i = 0; i < decls.size(); ++i)
      for (size_t j = i + 1; j < decls.size(); ++j)
        if (decls[i].first == decls[j].first)
          throw DomainError("duplicate variable '" + decls[i].first + "'");
    return std::shared_ptr<const StateSpace>(new StateSpace(std::move(decls)));
  }

  size_t var_count() const { return vars_.size(); }
  size_t state_count() const { return count_; }
  const std::string& var_name(size_t i) const { return vars_[i].first; }
  const Domain& domain(size_t i) const { return vars_[i].second; }

  std::optional<size_t> find_var(std::string_view name) const {
    for (size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].first == name) return i;
    return std::nullopt;
  }

  size_t var_index(std::string_view name) const {
    auto i = find_var(name);
    if (!i) throw DomainError("unknown variable '" + std::string(name) + "'");
    return *i;
  }

  long long value_of(StateId id, size_t var) const {
    size_t idx = (id / strides_[var]) % vars_[var].second.size();
    return vars_[var].second.value_at(idx);
  }

  void decode(StateId id, std::vector<long long>& out) const {
    out.resize(vars_.size());
    for (size_t v = 0; v < vars_.size(); ++v) out[v] = value_of(id, v);
  }

  StateId encode(std::span<const long long> vals) const {
    StateId id = 0;
    for (size_t v = 0; v < vars_.size(); ++v)
      id += static_cast<StateId>(vars_[v].second.index_of(vals[v]) * strides_[v]);
    return id;
  }

  /// New id differing from `id` only at `var`; value checked against the domain.
  StateId with_value(StateId id, size_t var, long long val) const {
    if (!vars_[var].second.contains(val)) throw OutOfDomain(vars_[var].first, val);
    auto old_idx = static_cast<long long>((id / strides_[var]) % vars_[var].second.size());
    auto new_idx = static_cast<long long>(vars_[var].second.index_of(val));
    return static_cast<StateId>(static_cast<long long>(id) +
                                (new_idx - old_idx) * static_cast<long long>(strides_[var]));
  }

  std::string state_name(StateId id) const {
    std::string out;
    for (size_t v = 0; v < vars_.size(); ++v) {
      if (v) out += ",";
      out += vars_[v].first + "=" + vars_[v].second.value_name(value_of(id, v));
    }
    return out;
  }

  bool operator==(const StateSpace& o) const { return vars_ == o.vars_; }
  bool operator!=(const StateSpace& o) const { return !(*this == o); }

 private:
  explicit StateSpace(std::vector<std::pair<std::string, Domain>> decls) : vars_(std::move(decls)) {
    strides_.resize(vars_.size());
    size_t acc = 1;
    for (size_t v = vars_.size(); v-- > 0;) {
      strides_[v] = acc;
      acc *= vars_[v].second.size();
    }
    count_ = acc;
    if (count_ > (1u << 26))
      throw DomainError("state space too large (" + std::to_string(count_) + " states)");
  }

  std::vector<std::pair<std::string, Domain>> vars_;
  std::vector<size_t> strides_;
  size_t count_ = 0;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

inline SpacePtr make_space(std::vector<std::pair<std::string, Domain>> decls) {
  return StateSpace::make(std::move(decls));
}

/// A total valuation of the alphabet.
class State {
 public:
  State(SpacePtr space, StateId id) : space_(std::move(space)), id_(id) {
    space_->decode(id_, vals_);
  }

  State(SpacePtr space, std::vector<long long> vals) : space_(std::move(space)), vals_(std::move(vals)) {
    for (size_t v = 0; v < space_->var_count(); ++v)
      if (!space_->domain(v).contains(vals_[v])) throw OutOfDomain(space_->var_name(v), vals_[v]);
    id_ = space_->encode(vals_);
  }

  const SpacePtr& space() const { return space_; }
  StateId id() const { return id_; }
  long long value(size_t var) const { return vals_[var]; }
  long long value(std::string_view name) const { return vals_[space_->var_index(name)]; }
  std::span<const long long> values() const { return vals_; }
  std::string to_string() const { return space_->state_name(id_); }

  bool operator==(const State& o) const { return *space_ == *o.space_ && id_ == o.id_; }

 private:
  SpacePtr space_;
  StateId id_;
  std::vector<long long> vals_;
};

/// All states in lexicographic order of the declaration.
inline std::vector<State> enumerate(const SpacePtr& space) {
  std::vector<State> out;
  out.reserve(space->state_count());
  for (StateId id = 0; id < space->state_count(); ++id) out.emplace_back(space, id);
  return out;
}

/// New state differing only at `var`. Identity when the value is unchanged.
inline State update(const State& s, std::string_view var, long long val) {
  size_t v = s.space()->var_index(var);
  return State(s.space(), s.space()->with_value(s.id(), v, val));
}

}  // namespace proburel

#endif
