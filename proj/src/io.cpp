#include "spatiofd/io.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace spatiofd {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) {
        ++a;
    }
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) {
        --b;
    }
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

bool blank(const std::string& line) { return trim(line).empty(); }

double parse_real(const std::string& field, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ValidationError(where + ": '" + field + "' is not a finite number");
    }
    return v;
}

std::size_t parse_index(const std::string& field, const std::string& where) {
    std::size_t v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || v < 1) {
        throw ValidationError(where + ": '" + field + "' is not a positive integer");
    }
    return v;
}

std::vector<std::string> read_header(std::istream& in, const std::string& what) {
    std::string line;
    while (std::getline(in, line)) {
        if (!blank(line)) {
            return split_row(line);
        }
    }
    throw ValidationError(what + ": empty file (a header row is required)");
}

struct Cell {
    std::size_t replicate;
    std::size_t location;
    std::size_t time;
    double value;
};

} // namespace

SpatialFunctionalDataset ingest(std::istream& values, std::istream& locations,
                                const IngestOptions& options) {
    // locations
    const auto lhead = read_header(locations, "locations CSV");
    if (lhead.size() < 2 || lhead.size() > 3 || lhead[0] != "location_id" || lhead[1] != "x" ||
        (lhead.size() == 3 && lhead[2] != "y")) {
        throw ValidationError("locations CSV: header must be location_id,x[,y]");
    }
    const std::size_t dim = lhead.size() - 1;
    std::vector<std::string> ids;
    std::vector<double> coords;
    std::unordered_map<std::string, std::size_t> index;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(locations, line)) {
        ++lineno;
        if (blank(line)) {
            continue;
        }
        const auto f = split_row(line);
        const std::string where = "locations CSV line " + std::to_string(lineno);
        if (f.size() != lhead.size()) {
            throw ValidationError(where + ": expected " + std::to_string(lhead.size()) + " fields");
        }
        if (f[0].empty()) {
            throw ValidationError(where + ": empty location_id");
        }
        if (!index.emplace(f[0], ids.size()).second) {
            throw ValidationError(where + ": duplicate location_id '" + f[0] + "'");
        }
        ids.push_back(f[0]);
        for (std::size_t k = 1; k <= dim; ++k) {
            coords.push_back(parse_real(f[k], where));
        }
    }
    if (ids.empty()) {
        throw ValidationError("locations CSV: no locations");
    }
    Matrix xy(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < ids.size(); ++j) {
        for (std::size_t k = 0; k < dim; ++k) {
            xy(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = coords[j * dim + k];
        }
    }
    SpatialDomain domain(std::move(xy), ids);

    // values
    const auto vhead = read_header(values, "values CSV");
    if (vhead != std::vector<std::string>{"replicate", "location_id", "time_index", "value"}) {
        throw ValidationError("values CSV: header must be replicate,location_id,time_index,value");
    }
    std::vector<Cell> cells;
    std::size_t n = 0;
    std::size_t t = 0;
    lineno = 1;
    while (std::getline(values, line)) {
        ++lineno;
        if (blank(line)) {
            continue;
        }
        const auto f = split_row(line);
        const std::string where = "values CSV line " + std::to_string(lineno);
        if (f.size() != 4) {
            throw ValidationError(where + ": expected 4 fields");
        }
        const auto it = index.find(f[1]);
        if (it == index.end()) {
            throw ValidationError(where + ": location_id '" + f[1] + "' is not in the locations file");
        }
        Cell c{parse_index(f[0], where), it->second, parse_index(f[2], where), parse_real(f[3], where)};
        if (options.log10) {
            if (!(c.value > -1.0)) {
                throw ValidationError(where + ": log10 transform needs value > -1");
            }
            c.value = std::log10(c.value + 1.0);
        }
        n = std::max(n, c.replicate);
        t = std::max(t, c.time);
        cells.push_back(c);
    }
    if (cells.empty()) {
        throw ValidationError("values CSV: no data rows");
    }
    const std::size_t p = ids.size();
    if (t < 2) {
        throw ValidationError("values CSV: need at least 2 time points");
    }
    RowMatrix grid_values(static_cast<Eigen::Index>(n * p), static_cast<Eigen::Index>(t));
    std::vector<char> seen(n * p * t, 0);
    for (const auto& c : cells) {
        const std::size_t row = (c.replicate - 1) * p + c.location;
        const std::size_t flat = row * t + (c.time - 1);
        if (seen[flat]) {
            throw ValidationError("values CSV: duplicate cell (replicate=" + std::to_string(c.replicate) +
                                  ", location=" + ids[c.location] + ", time=" + std::to_string(c.time) + ")");
        }
        seen[flat] = 1;
        grid_values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c.time - 1)) = c.value;
    }
    std::ostringstream missing;
    std::size_t missing_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t m = 0; m < t; ++m) {
                if (seen[(i * p + j) * t + m]) {
                    continue;
                }
                if (missing_count < 20) {
                    missing << (missing_count ? "; " : "") << "(replicate=" << (i + 1)
                            << ", location=" << ids[j] << ", time=" << (m + 1) << ")";
                }
                ++missing_count;
            }
        }
    }
    if (missing_count > 0) {
        throw ValidationError("values CSV: " + std::to_string(missing_count) + " missing cell(s): " +
                              missing.str() + (missing_count > 20 ? "; ..." : ""));
    }
    return SpatialFunctionalDataset(std::move(grid_values), n, TimeGrid::uniform(t), std::move(domain));
}

SpatialFunctionalDataset ingest(const std::filesystem::path& values,
                                const std::filesystem::path& locations, const IngestOptions& options) {
    std::ifstream v(values);
    if (!v) {
        throw ValidationError("cannot open values file " + values.string());
    }
    std::ifstream l(locations);
    if (!l) {
        throw ValidationError("cannot open locations file " + locations.string());
    }
    return ingest(v, l, options);
}

void export_values(const SpatialFunctionalDataset& data, std::ostream& out) {
    out << "replicate,location_id,time_index,value\n";
    const auto& ids = data.domain().ids();
    std::string row;
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.p(); ++j) {
            const auto curve = data.curve(i, j);
            for (std::size_t m = 0; m < data.t(); ++m) {
                row.clear();
                row += std::to_string(i + 1);
                row += ',';
                row += ids[j];
                row += ',';
                row += std::to_string(m + 1);
                row += ',';
                row += format_double(curve[m]);
                row += '\n';
                out << row;
            }
        }
    }
}

void export_locations(const SpatialDomain& domain, std::ostream& out) {
    out << (domain.dim() == 1 ? "location_id,x\n" : "location_id,x,y\n");
    for (std::size_t j = 0; j < domain.size(); ++j) {
        out << domain.ids()[j];
        for (int k = 0; k < domain.dim(); ++k) {
            out << ',' << format_double(domain.coords()(static_cast<Eigen::Index>(j), k));
        }
        out << '\n';
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write " + path.string());
    }
    return out;
}

void export_dataset(const SpatialFunctionalDataset& data, const std::filesystem::path& values,
                    const std::filesystem::path& locations) {
    auto v = open_output(values);
    export_values(data, v);
    auto l = open_output(locations);
    export_locations(data.domain(), l);
}

void write_ground_truth(const GroundTruth& truth, const SpatialDomain& domain, std::ostream& out) {
    out << "location_id,theta\n";
    for (std::size_t j = 0; j < domain.size(); ++j) {
        out << domain.ids()[j] << ',' << (truth.support[j] ? 1 : 0) << '\n';
    }
}

void write_q_profile(const QProfile& profile, std::ostream& out) {
    out << "tau,q_value\n";
    for (Eigen::Index k = 0; k < profile.values.size(); ++k) {
        out << (k + 1) << ',' << format_double(profile.values(k)) << '\n';
    }
}

void write_recovery(const RecoveryResult& result, const SpatialDomain& domain, std::ostream& out) {
    std::vector<char> chosen(domain.size(), 0);
    for (std::size_t j : result.selected) {
        chosen[j] = 1;
    }
    out << "location_id,W,selected\n";
    for (std::size_t j = 0; j < domain.size(); ++j) {
        out << domain.ids()[j] << ',' << format_double(result.w(static_cast<Eigen::Index>(j))) << ','
            << int(chosen[j]) << '\n';
    }
}

void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out) {
    out << "scenario,n,p,scheme,delta,r_s,tau_star,T,method,metric,value\n";
    for (const auto& row : report.aggregates) {
        const auto& s = report.config.scenarios[row.cell];
        for (const auto& [metric, value] : row.metrics) {
            out << s.name << ',' << s.sim.n << ',' << s.sim.p << ',' << to_string(s.sim.scheme) << ','
                << format_double(s.sim.delta) << ',' << format_double(s.sim.r_s) << ','
                << s.sim.change_index() << ',' << s.sim.t << ',' << to_string(row.method) << ','
                << metric << ',' << (std::isnan(value) ? std::string("NA") : format_double(value))
                << '\n';
        }
    }
}

namespace {

nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json benchmark_to_json(const BenchmarkReport& report) {
    using nlohmann::json;
    const auto& cfg = report.config;
    json methods = json::array();
    for (auto m : cfg.methods) {
        methods.push_back(to_string(m));
    }
    json doc;
    doc["config"] = {{"seed", cfg.seed},       {"reps", cfg.reps},   {"mc_reps", cfg.mc_reps},
                     {"level", cfg.level},     {"alpha", cfg.alpha}, {"fve", cfg.fve_target},
                     {"varrho", cfg.varrho},   {"methods", methods}};
    json cells = json::array();
    const std::size_t nm = cfg.methods.size();
    for (std::size_t c = 0; c < cfg.scenarios.size(); ++c) {
        const auto& s = cfg.scenarios[c];
        json cell = {{"scenario", s.name},
                     {"n", s.sim.n},
                     {"p", s.sim.p},
                     {"scheme", to_string(s.sim.scheme)},
                     {"delta", s.sim.delta},
                     {"r_s", s.sim.r_s},
                     {"tau_star", s.sim.change_index()},
                     {"T", s.sim.t}};
        json per_method = json::array();
        for (std::size_t m = 0; m < nm; ++m) {
            const auto& agg = report.aggregates[c * nm + m];
            json metrics = json::object();
            for (const auto& [k, v] : agg.metrics) {
                metrics[k] = number_or_null(v);
            }
            json runs = json::array();
            for (std::size_t r = 0; r < cfg.reps; ++r) {
                const auto& rec = report.runs[(c * cfg.reps + r) * nm + m];
                json jr = {{"rep", rec.rep}, {"status", to_string(rec.status)}};
                if (!rec.message.empty()) {
                    jr["message"] = rec.message;
                }
                if (rec.pvalue) {
                    jr["pvalue"] = *rec.pvalue;
                    jr["rejected"] = *rec.rejected;
                }
                if (rec.tau_hat) {
                    jr["tau_hat"] = *rec.tau_hat;
                }
                if (rec.fdp) {
                    jr["fdp"] = *rec.fdp;
                    jr["tdp"] = *rec.tdp;
                    jr["selected"] = *rec.selected;
                }
                runs.push_back(std::move(jr));
            }
            per_method.push_back({{"method", to_string(agg.method)}, {"metrics", metrics}, {"runs", runs}});
        }
        cell["methods"] = per_method;
        cells.push_back(std::move(cell));
    }
    doc["cells"] = cells;
    return doc;
}

DetectionBlock DetectionBlock::from(const ChangePointResult& r) {
    DetectionBlock b;
    b.statistic = r.kernel ? "Qh" : "Q0";
    b.q_max = r.q_max;
    b.q_sum = r.q_sum;
    b.p_max = r.p_max;
    b.p_sum = r.p_sum;
    b.tau_hat = r.tau_hat;
    b.bandwidth = r.bandwidth;
    b.truncation = r.truncation;
    b.mc_reps = r.mc_reps;
    b.n = r.n;
    b.profile.assign(r.profile.values.data(), r.profile.values.data() + r.profile.values.size());
    return b;
}

RecoveryBlock RecoveryBlock::from(const RecoveryResult& r, const SpatialDomain& domain) {
    RecoveryBlock b;
    b.method = to_string(r.method);
    b.alpha = r.alpha;
    b.tau_hat = r.tau_hat;
    b.tau_split = r.tau_split;
    b.truncation = r.truncation;
    b.bandwidth = r.bandwidth;
    if (std::isfinite(r.threshold)) {
        b.threshold = r.threshold;
    }
    b.location_ids = domain.ids();
    b.w.assign(r.w.data(), r.w.data() + r.w.size());
    b.pvalues.assign(r.pvalues.data(), r.pvalues.data() + r.pvalues.size());
    for (std::size_t j : r.selected) {
        b.selected.push_back(domain.ids()[j]);
    }
    return b;
}

nlohmann::json to_json(const Report& report) {
    using nlohmann::json;
    json doc = json::object();
    if (report.detection) {
        const auto& d = *report.detection;
        doc["detection"] = {{"statistic", d.statistic},
                            {"q_max", d.q_max},
                            {"q_sum", d.q_sum},
                            {"p_max", d.p_max ? json(*d.p_max) : json(nullptr)},
                            {"p_sum", d.p_sum ? json(*d.p_sum) : json(nullptr)},
                            {"tau_hat", d.tau_hat},
                            {"bandwidth", d.bandwidth},
                            {"truncation", d.truncation},
                            {"mc_reps", d.mc_reps},
                            {"n", d.n},
                            {"q_profile", d.profile}};
    }
    if (report.recovery) {
        const auto& r = *report.recovery;
        doc["recovery"] = {{"method", r.method},
                           {"alpha", r.alpha},
                           {"tau_hat", r.tau_hat},
                           {"tau_split", r.tau_split},
                           {"truncation", r.truncation},
                           {"bandwidth", r.bandwidth},
                           {"threshold", r.threshold ? json(*r.threshold) : json(nullptr)},
                           {"location_ids", r.location_ids},
                           {"W", r.w},
                           {"pvalues", r.pvalues},
                           {"selected", r.selected}};
    }
    const auto& p = report.provenance;
    doc["provenance"] = {{"config_hash", p.config_hash},
                         {"seed", p.seed},
                         {"versions", {{"spatiofd", p.version}, {"eigen", p.eigen_version}}}};
    return doc;
}

namespace {

template <class T>
std::optional<T> optional_field(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        return std::nullopt;
    }
    return obj.at(key).get<T>();
}

} // namespace

Report report_from_json(const nlohmann::json& doc) {
    Report out;
    try {
        if (doc.contains("detection")) {
            const auto& d = doc.at("detection");
            DetectionBlock b;
            b.statistic = d.at("statistic").get<std::string>();
            b.q_max = d.at("q_max").get<double>();
            b.q_sum = d.at("q_sum").get<double>();
            b.p_max = optional_field<double>(d, "p_max");
            b.p_sum = optional_field<double>(d, "p_sum");
            b.tau_hat = d.at("tau_hat").get<std::size_t>();
            b.bandwidth = d.at("bandwidth").get<double>();
            b.truncation = d.at("truncation").get<std::size_t>();
            b.mc_reps = d.at("mc_reps").get<std::size_t>();
            b.n = d.at("n").get<std::size_t>();
            b.profile = d.at("q_profile").get<std::vector<double>>();
            out.detection = std::move(b);
        }
        if (doc.contains("recovery")) {
            const auto& r = doc.at("recovery");
            RecoveryBlock b;
            b.method = r.at("method").get<std::string>();
            b.alpha = r.at("alpha").get<double>();
            b.tau_hat = r.at("tau_hat").get<std::size_t>();
            b.tau_split = r.at("tau_split").get<std::size_t>();
            b.truncation = r.at("truncation").get<std::size_t>();
            b.bandwidth = r.at("bandwidth").get<double>();
            b.threshold = optional_field<double>(r, "threshold");
            b.location_ids = r.at("location_ids").get<std::vector<std::string>>();
            b.w = r.at("W").get<std::vector<double>>();
            b.pvalues = r.at("pvalues").get<std::vector<double>>();
            b.selected = r.at("selected").get<std::vector<std::string>>();
            out.recovery = std::move(b);
        }
        const auto& p = doc.at("provenance");
        out.provenance.config_hash = p.at("config_hash").get<std::string>();
        out.provenance.seed = p.at("seed").get<std::uint64_t>();
        out.provenance.version = p.at("versions").at("spatiofd").get<std::string>();
        out.provenance.eigen_version = p.at("versions").at("eigen").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
    return out;
}

Report read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open report " + path.string());
    }
    try {
        return report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("report " + path.string() + " is not valid JSON: " + e.what());
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Provenance make_provenance(const std::string& canonical_config, std::uint64_t seed) {
    Provenance p;
    p.config_hash = fnv1a_hex(canonical_config);
    p.seed = seed;
    p.eigen_version = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION);
    return p;
}

} // namespace spatiofd
