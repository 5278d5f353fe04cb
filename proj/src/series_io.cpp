#include "atomcavity/series_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "atomcavity/errors.hpp"

namespace atomcavity {

namespace {

constexpr const char* kMagic = "# atomcavity-series 1";

std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InputError("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw InputError("not a number: '" + s + "'");
    return v;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

const std::string& ColumnarTable::meta_value(const std::string& key) const
{
    for (const auto& [k, v] : meta)
        if (k == key) return v;
    throw InputError("missing metadata '" + key + "'");
}

bool ColumnarTable::has_meta(const std::string& key) const
{
    for (const auto& kv : meta)
        if (kv.first == key) return true;
    return false;
}

const std::vector<double>& ColumnarTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data.at(i);
    throw InputError("missing column '" + name + "'");
}

void write_table(std::ostream& os, const ColumnarTable& table)
{
    if (table.data.size() != table.columns.size())
        throw InputError("column names and data disagree");
    const std::size_t rows = table.data.empty() ? 0 : table.data.front().size();
    for (const auto& col : table.data)
        if (col.size() != rows) throw InputError("ragged columns");

    os << kMagic << '\n';
    for (const auto& [k, v] : table.meta) os << "# " << k << ": " << v << '\n';
    os << "# columns:";
    for (const auto& c : table.columns) os << ' ' << c;
    os << '\n';
    std::string line;
    for (std::size_t r = 0; r < rows; ++r) {
        line.clear();
        for (std::size_t c = 0; c < table.data.size(); ++c) {
            if (c) line += ' ';
            line += fmt_double(table.data[c][r]);
        }
        os << line << '\n';
    }
}

ColumnarTable read_table(std::istream& is)
{
    ColumnarTable t;
    std::string line;
    if (!std::getline(is, line) || trim(line) != kMagic)
        throw InputError("not an atomcavity series file");
    bool have_columns = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = trim(line.substr(1, colon - 1));
            const std::string value = trim(line.substr(colon + 1));
            if (key == "columns") {
                std::istringstream names(value);
                std::string n;
                while (names >> n) t.columns.push_back(n);
                t.data.assign(t.columns.size(), {});
                have_columns = true;
            } else {
                t.meta.emplace_back(key, value);
            }
            continue;
        }
        if (!have_columns) throw InputError("data row before the column header");
        std::istringstream row(line);
        std::string tok;
        std::size_t c = 0;
        while (row >> tok) {
            if (c >= t.columns.size()) throw InputError("row has too many values");
            t.data[c++].push_back(parse_double(tok));
        }
        if (c != t.columns.size()) throw InputError("row has too few values");
    }
    if (!have_columns) throw InputError("missing column header");
    return t;
}

void write_table(const std::filesystem::path& path, const ColumnarTable& table)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    write_table(os, table);
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

ColumnarTable read_table(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    return read_table(is);
}

ColumnarTable trajectory_table(const TrajectoryRecord& r)
{
    ColumnarTable t;
    t.meta = {{"kind", "trajectory"},
              {"params", r.params_digest},
              {"seed", std::to_string(r.seed)},
              {"protocol", r.protocol}};
    t.columns = kTrajectoryColumns;
    t.data.assign(t.columns.size(), {});
    const std::size_t n = r.size();
    t.data[0] = r.time;
    t.data[1].resize(n);
    t.data[2].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.data[1][i] = r.alpha_plus[i].real();
        t.data[2][i] = r.alpha_plus[i].imag();
    }
    t.data[3] = r.photons_plus;
    t.data[4] = r.photons_minus;
    t.data[5] = r.dw_order;
    t.data[6] = r.bunching;
    return t;
}

TrajectoryRecord trajectory_from_table(const ColumnarTable& t)
{
    TrajectoryRecord r;
    r.time = t.column("t");
    const auto& re = t.column("re_alpha_plus");
    const auto& im = t.column("im_alpha_plus");
    r.alpha_plus.resize(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) r.alpha_plus[i] = Complex{re[i], im[i]};
    r.photons_plus = t.column("n_plus");
    r.photons_minus = t.column("n_minus");
    r.dw_order = t.column("phi");
    r.bunching = t.column("bunching");
    if (t.has_meta("params")) r.params_digest = t.meta_value("params");
    if (t.has_meta("protocol")) r.protocol = t.meta_value("protocol");
    if (t.has_meta("seed")) r.seed = std::stoull(t.meta_value("seed"));
    else if (t.has_meta("base_seed")) r.seed = std::stoull(t.meta_value("base_seed"));
    return r;
}

ColumnarTable ensemble_table(const EnsembleResult& result)
{
    ColumnarTable t = trajectory_table(result.mean_record());
    t.meta = {{"kind", "ensemble"},
              {"params", result.params_digest},
              {"base_seed", std::to_string(result.base_seed)},
              {"protocol", result.protocol},
              {"n_traj", std::to_string(result.n_traj)},
              {"diverged", std::to_string(result.diverged)}};
    return t;
}

ColumnarTable spectrum_table(const Spectrum& s)
{
    ColumnarTable t;
    t.meta = {{"kind", "spectrum"}, {"detrend", s.detrend}, {"frequency_unit", "Hz"}};
    t.columns = {"f_hz", "magnitude"};
    t.data = {s.frequency_hz, s.magnitude};
    return t;
}

ColumnarTable correlation_table(const CorrelationTrace& c)
{
    ColumnarTable t;
    t.meta = {{"kind", "correlation"},
              {"t1", fmt_double(c.t1)},
              {"normalization", fmt_double(c.normalization.real()) + " " +
                                    fmt_double(c.normalization.imag())},
              {"average_from", fmt_double(c.average_from)}};
    t.columns = {"t", "re_C", "im_C"};
    t.data.assign(3, {});
    t.data[0] = c.time;
    for (const auto& v : c.value) {
        t.data[1].push_back(v.real());
        t.data[2].push_back(v.imag());
    }
    return t;
}

CorrelationTrace correlation_from_table(const ColumnarTable& t)
{
    CorrelationTrace c;
    c.time = t.column("t");
    const auto& re = t.column("re_C");
    const auto& im = t.column("im_C");
    for (std::size_t i = 0; i < re.size(); ++i) c.value.emplace_back(re[i], im[i]);
    c.t1 = parse_double(t.meta_value("t1"));
    c.average_from = parse_double(t.meta_value("average_from"));
    std::istringstream norm(t.meta_value("normalization"));
    std::string a, b;
    norm >> a >> b;
    c.normalization = Complex{parse_double(a), parse_double(b)};
    return c;
}

}  // namespace atomcavity
