#ifndef PROBUREL_SERIALIZE_HPP
#define PROBUREL_SERIALIZE_HPP

#include <json.hpp>

#include "proburel/fixpoint.hpp"

namespace proburel {

using Json = nlohmann::json;

inline Json state_to_json(const StateSpace& sp, StateId id) {
  Json st = Json::object();
  for (size_t v = 0; v < sp.var_count(); ++v)
    st[sp.var_name(v)] = sp.domain(v).value_name(sp.value_of(id, v));
  return st;
}

inline Json space_to_json(const StateSpace& sp) {
  Json vars = Json::array();
  for (size_t v = 0; v < sp.var_count(); ++v) {
    Json d;
    d["name"] = sp.var_name(v);
    switch (sp.domain(v).kind()) {
      case DomainKind::boolean:
        d["kind"] = "bool";
        break;
      case DomainKind::int_range:
        d["kind"] = "int_range";
        d["lo"] = sp.domain(v).lo();
        d["hi"] = sp.domain(v).hi();
        break;
      case DomainKind::enumeration: {
        d["kind"] = "enum";
        Json labels = Json::array();
        for (size_t i = 0; i < sp.domain(v).size(); ++i)
          labels.push_back(sp.domain(v).value_name(static_cast<long long>(i)));
        d["labels"] = labels;
        break;
      }
    }
    vars.push_back(d);
  }
  return vars;
}

/// {space, rows: [{initial, finals: [{state, weight:"num/den"}]}]}
inline Json kernel_to_json(const Kernel& k) {
  const auto& sp = *k.space();
  Json out;
  out["space"] = space_to_json(sp);
  Json rows = Json::array();
  for (StateId s = 0; s < k.states(); ++s) {
    k.surface_error(s);
    const auto& row = k.row(s);
    Json r;
    r["initial"] = state_to_json(sp, s);
    if (row.def != 0) r["default"] = format_rational(row.def);
    Json finals = Json::array();
    for (const auto& [t, v] : row.w) {
      Json e;
      e["state"] = state_to_json(sp, t);
      e["weight"] = format_rational(v);
      finals.push_back(e);
    }
    r["finals"] = finals;
    rows.push_back(r);
  }
  out["rows"] = rows;
  return out;
}

/// One (initial, final, weight) triple per line, lexicographic order.
inline std::string kernel_to_csv(const Kernel& k) {
  const auto& sp = *k.space();
  std::string out = "initial,final,weight\n";
  for (StateId s = 0; s < k.states(); ++s) {
    k.surface_error(s);
    const auto& row = k.row(s);
    auto emit = [&](StateId t, const Rational& v) {
      out += "\"" + sp.state_name(s) + "\",\"" + sp.state_name(t) + "\"," + format_rational(v) + "\n";
    };
    if (row.def != 0) {
      for (StateId t = 0; t < k.states(); ++t) {
        const Rational& v = row.at(t);
        if (v != 0) emit(t, v);
      }
    } else {
      for (const auto& [t, v] : row.w)
        if (v != 0) emit(t, v);
    }
  }
  return out;
}

/// {verdict, checks: [...], ratio, N}
inline Json certificate_to_json(const Certificate& cert, const StateSpace& sp) {
  Json out;
  out["verdict"] = to_string(cert.verdict);
  out["reason"] = cert.reason;
  Json checks = Json::array();
  for (const auto& c : cert.checks) {
    Json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["detail"] = c.detail;
    checks.push_back(j);
  }
  out["checks"] = checks;
  out["N"] = cert.report.iterations_used;
  if (cert.report.geometric_ratio) {
    out["ratio"] = format_rational(*cert.report.geometric_ratio);
    out["ratio_steps"] = {cert.report.ratio_from, cert.report.ratio_to};
  }
  out["sup_gap"] = format_rational(cert.report.sup_gap);
  if (!cert.boundary_rows.empty()) {
    Json rows = Json::array();
    for (StateId s : cert.boundary_rows) rows.push_back(sp.state_name(s));
    out["boundary_rows"] = rows;
  }
  return out;
}

}  // namespace proburel

#endif
