#include "adaptswitch/trace.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace adaptswitch {

using nlohmann::json;

namespace {

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_row(const TraceRow& a, const TraceRow& b) {
    return a.app == b.app && a.k == b.k && a.mode == b.mode && same_double(a.y, b.y) &&
           same_double(a.yref, b.yref) && same_double(a.yref_prime, b.yref_prime) && same_double(a.e, b.e) &&
           same_double(a.u, b.u) && a.delay == b.delay && same_double(a.V, b.V) && same_double(a.dV, b.dV) &&
           same_double(a.phi_err, b.phi_err) && a.rank == b.rank && same_double(a.orth_residual, b.orth_residual) &&
           a.switch_code == b.switch_code && same_double(a.disturbance, b.disturbance) &&
           same_double(a.theta_norm, b.theta_norm);
}

void put(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

LoopMode parse_mode(const std::string& s) {
    if (s == "TT") return LoopMode::TT;
    if (s == "ET") return LoopMode::ET;
    if (s == "FIXED") return LoopMode::Fixed;
    throw std::runtime_error("trace: unknown mode '" + s + "'");
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("trace: bad number '" + s + "'");
    return v;
}

std::vector<SwitchEvent> switches_from_rows(const std::vector<TraceRow>& rows) {
    std::vector<SwitchEvent> out;
    for (const auto& r : rows) {
        if (r.switch_code == 0) continue;
        out.push_back(SwitchEvent{r.k, r.switch_code == 1 ? Mode::ET : Mode::TT, static_cast<int>(out.size()) + 1});
    }
    return out;
}

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json row_json(const TraceRow& r) {
    return json::array({r.app, r.k, std::string(to_string(r.mode)), num(r.y), num(r.yref), num(r.yref_prime),
                        num(r.e), num(r.u), r.delay, num(r.V), num(r.dV), num(r.phi_err), r.rank,
                        num(r.orth_residual), r.switch_code, num(r.disturbance), num(r.theta_norm)});
}

TraceRow row_from(const json& a) {
    TraceRow r;
    r.app = a.at(0).get<int>();
    r.k = a.at(1).get<long>();
    r.mode = parse_mode(a.at(2).get<std::string>());
    r.y = num(a.at(3));
    r.yref = num(a.at(4));
    r.yref_prime = num(a.at(5));
    r.e = num(a.at(6));
    r.u = num(a.at(7));
    r.delay = a.at(8).get<int>();
    r.V = num(a.at(9));
    r.dV = num(a.at(10));
    r.phi_err = num(a.at(11));
    r.rank = a.at(12).get<int>();
    r.orth_residual = num(a.at(13));
    r.switch_code = a.at(14).get<int>();
    r.disturbance = num(a.at(15));
    r.theta_norm = num(a.at(16));
    return r;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

bool operator==(const Transmission& a, const Transmission& b) {
    return a.app == b.app && a.submit_cycle == b.submit_cycle && a.delivery_cycle == b.delivery_cycle &&
           a.length == b.length;
}

bool operator==(const MinislotReport& a, const MinislotReport& b) {
    return a.cycle == b.cycle && a.slot_numbers == b.slot_numbers && a.idle_slots == b.idle_slots &&
           a.consumed == b.consumed && a.length_sum == b.length_sum && a.overflow == b.overflow &&
           a.transmitted == b.transmitted && a.static_senders == b.static_senders;
}

bool operator==(const Trace& a, const Trace& b) {
    if (a.scenario != b.scenario || a.horizon != b.horizon || a.d2 != b.d2 || a.error != b.error ||
        a.apps.size() != b.apps.size() || !(a.bus == b.bus)) {
        return false;
    }
    for (std::size_t i = 0; i < a.apps.size(); ++i) {
        const auto& x = a.apps[i];
        const auto& y = b.apps[i];
        if (x.app != y.app || x.impulses != y.impulses || x.m2 != y.m2 || x.eth != y.eth ||
            x.reference_sr_declared != y.reference_sr_declared ||
            x.reference_sr_measured != y.reference_sr_measured || x.rows.size() != y.rows.size() ||
            x.switches.size() != y.switches.size()) {
            return false;
        }
        for (std::size_t j = 0; j < x.switches.size(); ++j) {
            if (x.switches[j].k != y.switches[j].k || x.switches[j].to != y.switches[j].to ||
                x.switches[j].p != y.switches[j].p) {
                return false;
            }
        }
        for (std::size_t j = 0; j < x.rows.size(); ++j) {
            if (!same_row(x.rows[j], y.rows[j])) return false;
        }
    }
    return true;
}

TraceSummary Trace::summary(double tracking_tol) const {
    TraceSummary s;
    long settle = apps.empty() ? -1 : 0;
    for (const auto& a : apps) {
        s.switch_count += static_cast<long>(a.switches.size());
        long last_bad = -1;
        for (const auto& r : a.rows) {
            s.max_abs_y = std::max(s.max_abs_y, std::abs(r.y));
            s.max_abs_u = std::max(s.max_abs_u, std::abs(r.u));
            s.max_theta_norm = std::max(s.max_theta_norm, r.theta_norm);
            if (!(std::abs(r.e) < tracking_tol)) last_bad = r.k;
        }
        if (a.rows.empty() || (!a.rows.empty() && last_bad == a.rows.back().k)) {
            settle = -1;
        } else if (settle >= 0) {
            settle = std::max(settle, last_bad + 1);
        }
    }
    s.settling_sample = settle;
    return s;
}

void write_csv(std::ostream& out, const Trace& trace) {
    out << kCsvHeader << '\n';
    std::string line;
    for (const auto& a : trace.apps) {
        for (const auto& r : a.rows) {
            line.clear();
            line += std::to_string(r.app);
            line += ',';
            line += std::to_string(r.k);
            line += ',';
            line += to_string(r.mode);
            for (double v : {r.y, r.yref, r.yref_prime, r.e, r.u}) {
                line += ',';
                put(line, v);
            }
            line += ',';
            line += std::to_string(r.delay);
            for (double v : {r.V, r.dV, r.phi_err}) {
                line += ',';
                put(line, v);
            }
            line += ',';
            line += std::to_string(r.rank);
            line += ',';
            put(line, r.orth_residual);
            line += ',';
            line += std::to_string(r.switch_code);
            line += ',';
            put(line, r.disturbance);
            line += ',';
            put(line, r.theta_norm);
            out << line << '\n';
        }
    }
}

std::string to_csv(const Trace& trace) {
    std::ostringstream ss;
    write_csv(ss, trace);
    return ss.str();
}

Trace read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::runtime_error("trace: CSV header does not match schema " + std::string(kTraceSchemaVersion));
    }
    Trace t;
    std::map<int, std::size_t> index;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != 17) {
            throw std::runtime_error("trace: CSV line " + std::to_string(lineno) + " has " +
                                     std::to_string(c.size()) + " fields, expected 17");
        }
        TraceRow r;
        try {
            r.app = std::stoi(c[0]);
            r.k = std::stol(c[1]);
            r.mode = parse_mode(c[2]);
            r.y = parse_double(c[3]);
            r.yref = parse_double(c[4]);
            r.yref_prime = parse_double(c[5]);
            r.e = parse_double(c[6]);
            r.u = parse_double(c[7]);
            r.delay = std::stoi(c[8]);
            r.V = parse_double(c[9]);
            r.dV = parse_double(c[10]);
            r.phi_err = parse_double(c[11]);
            r.rank = std::stoi(c[12]);
            r.orth_residual = parse_double(c[13]);
            r.switch_code = std::stoi(c[14]);
            r.disturbance = parse_double(c[15]);
            r.theta_norm = parse_double(c[16]);
        } catch (const std::exception& ex) {
            throw std::runtime_error("trace: CSV line " + std::to_string(lineno) + ": " + ex.what());
        }
        auto it = index.find(r.app);
        if (it == index.end()) {
            it = index.emplace(r.app, t.apps.size()).first;
            t.apps.push_back(AppTrace{});
            t.apps.back().app = r.app;
        }
        t.apps[it->second].rows.push_back(r);
    }
    for (auto& a : t.apps) {
        a.switches = switches_from_rows(a.rows);
        for (const auto& r : a.rows) {
            if (r.disturbance != 0.0) a.impulses.push_back(r.k);
        }
        t.horizon = std::max<long>(t.horizon, static_cast<long>(a.rows.size()));
    }
    return t;
}

std::string to_json(const Trace& trace) {
    json j;
    j["schema"] = kTraceSchemaVersion;
    j["scenario"] = trace.scenario;
    j["horizon"] = trace.horizon;
    j["d2"] = trace.d2;
    j["error"] = trace.error ? json(*trace.error) : json(nullptr);
    j["columns"] = split(kCsvHeader);
    j["apps"] = json::array();
    for (const auto& a : trace.apps) {
        json ja;
        ja["app"] = a.app;
        ja["m2"] = a.m2;
        ja["eth"] = a.eth;
        ja["reference_sr_declared"] = a.reference_sr_declared ? json(*a.reference_sr_declared) : json(nullptr);
        ja["reference_sr_measured"] = a.reference_sr_measured ? json(*a.reference_sr_measured) : json(nullptr);
        ja["impulses"] = a.impulses;
        ja["switches"] = json::array();
        for (const auto& s : a.switches) {
            ja["switches"].push_back({{"k", s.k}, {"to", std::string(to_string(s.to))}, {"p", s.p}});
        }
        ja["rows"] = json::array();
        for (const auto& r : a.rows) ja["rows"].push_back(row_json(r));
        j["apps"].push_back(std::move(ja));
    }
    j["bus"] = json::array();
    for (const auto& c : trace.bus) {
        json jc{{"cycle", c.cycle},         {"slot_numbers", c.slot_numbers}, {"idle_slots", c.idle_slots},
                {"consumed", c.consumed},   {"length_sum", c.length_sum},     {"overflow", c.overflow},
                {"static_senders", c.static_senders}};
        jc["transmitted"] = json::array();
        for (const auto& t : c.transmitted) {
            jc["transmitted"].push_back(
                {{"app", t.app}, {"submit", t.submit_cycle}, {"delivery", t.delivery_cycle}, {"length", t.length}});
        }
        j["bus"].push_back(std::move(jc));
    }
    return j.dump();
}

Trace from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw std::runtime_error(std::string("trace: invalid JSON: ") + ex.what());
    }
    if (j.value("schema", std::string{}) != kTraceSchemaVersion) {
        throw std::runtime_error("trace: unsupported schema version");
    }
    Trace t;
    try {
        t.scenario = j.at("scenario").get<std::string>();
        t.horizon = j.at("horizon").get<long>();
        t.d2 = j.at("d2").get<int>();
        if (!j.at("error").is_null()) t.error = j.at("error").get<std::string>();
        for (const auto& ja : j.at("apps")) {
            AppTrace a;
            a.app = ja.at("app").get<int>();
            a.m2 = ja.at("m2").get<int>();
            a.eth = ja.at("eth").get<double>();
            if (!ja.at("reference_sr_declared").is_null()) a.reference_sr_declared = ja.at("reference_sr_declared").get<int>();
            if (!ja.at("reference_sr_measured").is_null()) a.reference_sr_measured = ja.at("reference_sr_measured").get<int>();
            a.impulses = ja.at("impulses").get<std::vector<long>>();
            for (const auto& s : ja.at("switches")) {
                a.switches.push_back(SwitchEvent{s.at("k").get<long>(),
                                                 s.at("to").get<std::string>() == "ET" ? Mode::ET : Mode::TT,
                                                 s.at("p").get<int>()});
            }
            for (const auto& r : ja.at("rows")) a.rows.push_back(row_from(r));
            t.apps.push_back(std::move(a));
        }
        for (const auto& jc : j.at("bus")) {
            MinislotReport c;
            c.cycle = jc.at("cycle").get<long>();
            c.slot_numbers = jc.at("slot_numbers").get<int>();
            c.idle_slots = jc.at("idle_slots").get<int>();
            c.consumed = jc.at("consumed").get<int>();
            c.length_sum = jc.at("length_sum").get<int>();
            c.overflow = jc.at("overflow").get<bool>();
            c.static_senders = jc.at("static_senders").get<std::vector<int>>();
            for (const auto& x : jc.at("transmitted")) {
                c.transmitted.push_back(Transmission{x.at("app").get<int>(), x.at("submit").get<long>(),
                                                     x.at("delivery").get<long>(), x.at("length").get<int>()});
            }
            t.bus.push_back(std::move(c));
        }
    } catch (const json::exception& ex) {
        throw std::runtime_error(std::string("trace: malformed JSON trace: ") + ex.what());
    }
    return t;
}

void export_trace(const Trace& trace, const std::filesystem::path& path, TraceFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    if (format == TraceFormat::Csv) {
        write_csv(out, trace);
    } else {
        out << to_json(trace) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Trace import_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    if (path.extension() == ".json") {
        std::stringstream ss;
        ss << in.rdbuf();
        return from_json(ss.str());
    }
    return read_csv(in);
}

}  // namespace adaptswitch
