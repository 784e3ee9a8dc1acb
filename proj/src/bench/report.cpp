/*
 Copyright 2026 The hybridopt Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "hybridopt/bench/report.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace hybridopt::bench {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::optional<double> mean_of(const std::map<Method, double>& means, Method m) {
  const auto it = means.find(m);
  if (it == means.end() || !std::isfinite(it->second)) return std::nullopt;
  return it->second;
}

BandCheck within_rel(const std::string& name, double v, double ref, double rel) {
  const bool ok = std::abs(v - ref) <= rel * std::abs(ref);
  return {name, ok, num(v) + " vs " + num(ref) + " +/- " + num(100.0 * rel) + "%"};
}

BandCheck within_abs(const std::string& name, double v, double ref, double tol) {
  const bool ok = std::abs(v - ref) <= tol;
  return {name, ok, num(v) + " vs " + num(ref) + " +/- " + num(tol)};
}

BandCheck in_range(const std::string& name, double v, double lo, double hi) {
  return {name, v >= lo && v <= hi, num(v) + " in [" + num(lo) + ", " + num(hi) + "]"};
}

}  // namespace

std::vector<BandCheck> acceptance_bands(const std::string& env,
                                        const std::map<Method, double>& means) {
  std::vector<BandCheck> out;
  const auto ddp = mean_of(means, Method::kDdp);
  const auto ddpg = mean_of(means, Method::kDdpg);
  const auto hmp = mean_of(means, Method::kHmp);
  const auto hjb = mean_of(means, Method::kHjb);
  if (env == "ex1") {
    if (ddp) out.push_back(within_rel("ddp cost", *ddp, 23.2389, 0.05));
    if (ddpg) out.push_back(in_range("ddpg mean cost", *ddpg, 20.0, 26.0));
  } else if (env == "ex2") {
    if (ddp) out.push_back(within_rel("ddp cost", *ddp, 77.3122, 0.05));
    if (ddpg) out.push_back({"ddpg mean cost < 72", *ddpg < 72.0, num(*ddpg)});
    if (ddp && ddpg) {
      out.push_back({"ddpg below ddp", *ddpg < *ddp, num(*ddpg) + " < " + num(*ddp)});
    }
  } else if (env == "ex3") {
    if (ddp) out.push_back(within_rel("ddp cost", *ddp, 38.2408, 0.05));
    if (ddpg) out.push_back(in_range("ddpg mean cost", *ddpg, 37.0, 44.0));
    if (ddp && ddpg) {
      out.push_back({"ddp not above ddpg", *ddp <= *ddpg, num(*ddp) + " <= " + num(*ddpg)});
    }
  } else if (env == "analytic1") {
    if (hmp) out.push_back(within_abs("hmp cost", *hmp, 1.0209, 1e-3));
    if (hjb) out.push_back(within_rel("hjb cost", *hjb, 1.0209, 0.02));
  } else if (env == "analytic2") {
    if (hmp) out.push_back(within_abs("hmp cost", *hmp, 6.5274, 1e-3));
  }
  return out;
}

bool Comparison::all_pass() const {
  for (const auto& b : bands) {
    if (!b.pass) return false;
  }
  for (const auto& r : rows) {
    if (r.failed_seeds > 0) return false;
  }
  return true;
}

std::string Comparison::text() const {
  std::ostringstream os;
  os << "env " << env << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %4s %14s %12s %7s\n", "method", "n", "mean", "std",
                "failed");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %4d %14.4f %12.4f %7d\n",
                  std::string(method_name(r.method)).c_str(), r.n, r.mean, r.std, r.failed_seeds);
    os << line;
  }
  for (const auto& d : deltas) {
    os << "delta " << method_name(rows[d.b].method) << " - " << method_name(rows[d.a].method)
       << " = " << num(d.value) << "\n";
  }
  for (const auto& b : bands) {
    os << (b.pass ? "PASS " : "FAIL ") << b.name << ": " << b.detail << "\n";
  }
  return os.str();
}

nlohmann::json Comparison::to_json() const {
  nlohmann::json j;
  j["env"] = env;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"method", std::string(method_name(r.method))},
                         {"n", r.n},
                         {"mean", r.mean},
                         {"std", r.std},
                         {"failed_seeds", r.failed_seeds}});
  }
  j["deltas"] = nlohmann::json::array();
  for (const auto& d : deltas) {
    j["deltas"].push_back({{"from", std::string(method_name(rows[d.a].method))},
                           {"to", std::string(method_name(rows[d.b].method))},
                           {"value", d.value}});
  }
  j["bands"] = nlohmann::json::array();
  for (const auto& b : bands) {
    j["bands"].push_back({{"name", b.name}, {"pass", b.pass}, {"detail", b.detail}});
  }
  j["pass"] = all_pass();
  return j;
}

Comparison compare_report(const std::vector<RunSummary>& summaries) {
  if (summaries.size() < 2) throw InvalidInput("compare: need at least two summaries");
  Comparison c;
  c.env = summaries.front().env;
  std::map<Method, double> means;
  for (const auto& s : summaries) {
    if (s.env != c.env) {
      throw InvalidInput("compare: env mismatch (" + c.env + " vs " + s.env + ")");
    }
    const std::vector<double> costs = s.costs();
    Comparison::Row row{s.method, static_cast<int>(costs.size()), s.mean, s.std, 0};
    if (!costs.empty()) {
      const Stats st = aggregate_stats(costs);
      row.mean = st.mean;
      row.std = st.std;
    }
    row.failed_seeds = static_cast<int>(s.seeds.size() - costs.size());
    c.rows.push_back(row);
    // first summary per method wins for the bands
    means.emplace(s.method, row.mean);
  }
  for (std::size_t a = 0; a < c.rows.size(); ++a) {
    for (std::size_t b = a + 1; b < c.rows.size(); ++b) {
      c.deltas.push_back({a, b, c.rows[b].mean - c.rows[a].mean});
    }
  }
  c.bands = acceptance_bands(c.env, means);
  return c;
}

std::vector<BandCheck> check_summary(const RunSummary& summary) {
  std::map<Method, double> means{{summary.method, summary.mean}};
  if (summary.reference) means.emplace(Method::kDdp, *summary.reference);
  return acceptance_bands(summary.env, means);
}

}  // namespace hybridopt::bench
