#include <cmath>
#include <charconv>
#include <ostream>

#include "json.hpp"

#include "abp/cli.hpp"
#include "abp/kernels.hpp"

namespace abp::cli {
namespace {

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string summation_name(series::Summation s) {
    return s == series::Summation::compensated ? "compensated" : "plain";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> provenance(const RunSpec& spec,
                                                            const std::string& command) {
    std::vector<std::pair<std::string, std::string>> lines;
    auto add = [&](std::string k, std::string v) { lines.emplace_back(std::move(k), std::move(v)); };
    add("tool", std::string(kToolName) + " " + kVersion);
    add("command", command);
    add("method", method_name(spec.method));
    if (!spec.preset.empty()) add("preset", spec.preset);
    auto param = [&](const char* name, double fixed) {
        for (const auto& a : spec.sweep)
            if (a.variable == name) return add(name, "sweep " + a.text());
        add(name, number(fixed));
    };
    param("x0", spec.params.x0);
    param("pe", spec.params.pe);
    param("beta", spec.params.beta);
    param("eta", spec.params.eta);
    add("series.n_terms", std::to_string(spec.series.n_terms));
    add("series.resonance_eps", number(spec.series.resonance_eps));
    add("series.summation", summation_name(spec.series.summation));
    add("pde.nx", std::to_string(spec.grid.nx));
    add("pde.dt", number(spec.grid.dt));
    add("pde.t_max", number(spec.grid.t_max));
    add("pde.s_tail", number(spec.grid.s_tail));
    add("pde.theta", number(spec.grid.theta));
    add("pde.startup_steps", std::to_string(spec.grid.startup_steps));
    add("bvp.nx", std::to_string(spec.bvp_nx) + " (richardson with " +
                      std::to_string(2 * spec.bvp_nx + 1) + ")");
    add("mc.particles", std::to_string(spec.mc.n_particles));
    add("mc.dt", number(spec.mc.dt_mc));
    add("mc.seed", std::to_string(spec.mc.seed));
    add("mc.streams", std::to_string(spec.mc.streams));
    add("jobs", std::to_string(spec.jobs));
    add("kernels", std::string(kernels::backend_name(kernels::active_backend())));
    if (command == "survival") {
        add("times", spec.times.text());
        add("order", std::to_string(spec.order));
    }
    return lines;
}

void write_csv(const Table& table, std::ostream& out) {
    for (const auto& [k, v] : table.provenance) out << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << number(row[i]);
        out << '\n';
    }
}

void write_json(const Table& table, std::ostream& out) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json header = nlohmann::ordered_json::object();
    for (const auto& [k, v] : table.provenance) header[k] = v;
    doc["provenance"] = header;
    doc["columns"] = table.columns;
    auto records = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json rec = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (std::isnan(row[i]))
                rec[table.columns[i]] = nullptr;
            else
                rec[table.columns[i]] = row[i];
        }
        records.push_back(std::move(rec));
    }
    doc["records"] = std::move(records);
    out << doc.dump(2) << '\n';
}

}  // namespace abp::cli
