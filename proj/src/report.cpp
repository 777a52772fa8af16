#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "procache/errors.hpp"
#include "procache/experiment.hpp"
#include "procache/summation.hpp"

namespace procache {

namespace {

std::string real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_field(std::string_view text, std::size_t line, std::string_view column) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("csv line " + std::to_string(line) + ": bad " + std::string(column) + " '" +
                          std::string(text) + "'");
    }
    return value;
}

// Whether the metric can change with gamma for a fixed scheme and cache size.
bool gamma_matters(Scheme scheme, Metric metric) {
    if (scheme == Scheme::reactive) return false;
    if (metric == Metric::objective) return true;
    return scheme == Scheme::noncoop_optimal || scheme == Scheme::coop_optimal;
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string series_label(const Series& s) {
    std::string label(to_string(s.scheme));
    if (s.gamma) label += " (gamma=" + real(*s.gamma) + ")";
    return label;
}

// Round axis bounds outward to a step of 1, 2 or 5 times a power of ten.
double nice_step(double span, int ticks) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= f * mag) return f * mag;
    }
    return 10.0 * mag;
}

}  // namespace

std::string format_csv(const std::vector<SweepRow>& rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += to_string(r.scheme);
        out += ',' + std::to_string(r.cache_size);
        out += ',' + real(r.gamma);
        out += ',' + std::to_string(r.replication);
        out += ',' + real(r.per_file_delay);
        out += ',' + real(r.caching_gain);
        out += ',' + real(r.objective);
        out += ',' + std::to_string(r.cached_count);
        out += '\n';
    }
    return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    if (rows.empty()) throw ParameterError("no rows to write");
    write_file(path, format_csv(rows));
}

std::vector<SweepRow> parse_csv(std::string_view text) {
    std::vector<SweepRow> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kCsvHeader) throw ConfigError("csv header mismatch on line " + std::to_string(line_no));
            header_seen = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 8) {
            throw ConfigError("csv line " + std::to_string(line_no) + ": expected 8 fields, got " +
                              std::to_string(f.size()));
        }
        SweepRow r;
        r.scheme = parse_scheme(f[0]);
        r.cache_size = parse_field<std::size_t>(f[1], line_no, "cache_size");
        r.gamma = parse_field<double>(f[2], line_no, "gamma");
        r.replication = parse_field<std::size_t>(f[3], line_no, "replication");
        r.per_file_delay = parse_field<double>(f[4], line_no, "per_file_delay");
        r.caching_gain = parse_field<double>(f[5], line_no, "caching_gain");
        r.objective = parse_field<double>(f[6], line_no, "objective");
        r.cached_count = parse_field<std::size_t>(f[7], line_no, "cached_count");
        rows.push_back(r);
    }
    if (!header_seen) throw ConfigError("csv is empty");
    return rows;
}

std::vector<SweepRow> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

std::vector<Series> aggregate(const std::vector<SweepRow>& rows, Metric metric) {
    using Key = std::tuple<int, double, bool>;  // scheme, gamma, has gamma
    std::map<Key, std::map<std::size_t, std::vector<double>>> groups;
    for (const auto& r : rows) {
        const bool g = gamma_matters(r.scheme, metric);
        const Key key{static_cast<int>(r.scheme), g ? r.gamma : 0.0, g};
        const double v = metric == Metric::per_file_delay ? r.per_file_delay : r.objective;
        groups[key][r.cache_size].push_back(v);
    }

    std::vector<Series> out;
    for (const auto& [key, by_size] : groups) {
        Series s;
        s.scheme = static_cast<Scheme>(std::get<0>(key));
        if (std::get<2>(key)) s.gamma = std::get<1>(key);
        for (const auto& [size, values] : by_size) {
            SeriesPoint p;
            p.cache_size = size;
            p.count = values.size();
            CompensatedSum sum;
            for (double v : values) sum += v;
            p.mean = sum.value() / static_cast<double>(values.size());
            if (values.size() > 1) {
                CompensatedSum sq;
                for (double v : values) sq += (v - p.mean) * (v - p.mean);
                p.stddev = std::sqrt(sq.value() / static_cast<double>(values.size() - 1));
            }
            s.points.push_back(p);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string render_svg(const std::vector<SweepRow>& rows, Metric metric, std::string_view title) {
    const auto series = aggregate(rows, metric);

    constexpr double width = 720, height = 480;
    constexpr double left = 80, right = 220, top = 40, bottom = 60;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            const double x = static_cast<double>(p.cache_size);
            const double lo = p.mean - p.stddev, hi = p.mean + p.stddev;
            if (first) {
                xmin = xmax = x;
                ymin = lo;
                ymax = hi;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, lo);
            ymax = std::max(ymax, hi);
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    ymin = std::min(ymin, 0.0);
    const double ystep = nice_step(ymax - ymin, 5);
    ymin = std::floor(ymin / ystep) * ystep;
    ymax = std::ceil(ymax / ystep) * ystep;
    if (ymax <= ymin) ymax = ymin + ystep;

    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * plot_h; };

    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
            << escape_xml(title) << "</text>\n";
    }

    // Axes, grid and ticks.
    svg << "<g stroke=\"#444\" fill=\"none\">\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\"/>\n</g>\n";
    const double xstep = std::max(1.0, nice_step(xmax - xmin, 10));
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9; x += xstep) {
        svg << "<line x1=\"" << px(x) << "\" y1=\"" << top + plot_h << "\" x2=\"" << px(x) << "\" y2=\""
            << top + plot_h + 5 << "\" stroke=\"#444\"/>\n";
        svg << "<text x=\"" << px(x) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
            << real(x) << "</text>\n";
    }
    for (double y = ymin; y <= ymax + ystep * 1e-9; y += ystep) {
        svg << "<line x1=\"" << left << "\" y1=\"" << py(y) << "\" x2=\"" << left + plot_w << "\" y2=\""
            << py(y) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << real(y)
            << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\">cache size (files)</text>\n";
    svg << "<text transform=\"translate(20," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << (metric == Metric::per_file_delay ? "per-file delay (s/file)" : "objective") << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = palette[i % std::size(palette)];
        svg << "<g stroke=\"" << color << "\" fill=\"none\">\n<polyline points=\"";
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            const auto& p = s.points[k];
            svg << (k ? " " : "") << px(static_cast<double>(p.cache_size)) << ',' << py(p.mean);
        }
        svg << "\" stroke-width=\"1.8\"/>\n";
        for (const auto& p : s.points) {
            const double x = px(static_cast<double>(p.cache_size));
            if (p.stddev > 0) {
                svg << "<line x1=\"" << x << "\" y1=\"" << py(p.mean - p.stddev) << "\" x2=\"" << x
                    << "\" y2=\"" << py(p.mean + p.stddev) << "\"/>\n";
            }
            svg << "<circle cx=\"" << x << "\" cy=\"" << py(p.mean) << "\" r=\"2.5\" fill=\"" << color
                << "\"/>\n";
        }
        svg << "</g>\n";
        const double ly = top + 10 + 18 * static_cast<double>(i);
        svg << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 36
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << left + plot_w + 42 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series_label(s))
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const std::vector<SweepRow>& rows, const std::filesystem::path& path, Metric metric,
               std::string_view title) {
    if (rows.empty()) throw ParameterError("no rows to plot");
    write_file(path, render_svg(rows, metric, title));
}

std::string sweep_metadata(const ScenarioConfig& config, const SweepSpec& spec, const SweepResult& result) {
    using nlohmann::ordered_json;
    ordered_json meta;
    meta["scenario"] = config.name;
    meta["replications"] = spec.replications;
    meta["base_seed"] = spec.base_seed;
    meta["seed_rule"] = "replication r redraws vehicles with seed base_seed + r";
    if (config.mobility) {
        meta["vehicles"] = "redrawn from the mobility model";
        meta["vehicle_count"] = config.mobility->vehicle_count;
        meta["zipf_exponents"] = config.mobility->exponents();
        meta["zipf_exponents_default"] = config.mobility->zipf_exponents.empty();
        meta["velocity_kmh"] = {{"mean", config.mobility->velocity_kmh.mean},
                                {"variance", config.mobility->velocity_kmh.variance},
                                {"min", config.mobility->velocity_kmh.lower},
                                {"max", config.mobility->velocity_kmh.upper}};
    } else {
        meta["vehicles"] = "fixed by the scenario file";
    }
    meta["evaluation"] = "per-file delays use the cooperative information model for every scheme";
    meta["percentage_gain"] = "caching_gain / reactive per_file_delay * 100";
    meta["row_count"] = result.rows.size();
    auto skipped = ordered_json::array();
    for (const auto& c : result.skipped) {
        skipped.push_back({{"scheme", std::string(to_string(c.scheme))},
                           {"cache_size", c.cache_size},
                           {"gamma", c.gamma},
                           {"replication", c.replication},
                           {"reason", c.reason}});
    }
    meta["skipped"] = std::move(skipped);
    return meta.dump(2) + "\n";
}

}  // namespace procache
