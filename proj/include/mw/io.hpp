#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mw {

struct EmptySeries : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int schema_version = 1;

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json load_json_file(const std::string& path) { return nlohmann::json::parse(read_text(path)); }

/// FNV-1a 64-bit, hex.
inline std::string digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::json make_report(const std::string& command, const nlohmann::json& inputs, nlohmann::json results) {
    return {{"schema_version", schema_version},
            {"command", command},
            {"inputs_digest", digest(inputs.dump())},
            {"results", std::move(results)}};
}

/// Shortest round-trip formatting, stable across runs.
inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    double back = std::strtod(buf, nullptr);
    for (int p = 6; p < 17; ++p) {
        char b2[32];
        std::snprintf(b2, sizeof b2, "%.*g", p, x);
        if (std::strtod(b2, nullptr) == back) return b2;
    }
    return buf;
}

// ---------------------------------------------------------------- CSV

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::invalid_argument("csv: no column '" + name + "'");
    }
    std::vector<double> numeric(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) {
            if (c >= r.size()) throw std::invalid_argument("csv: short row");
            std::size_t used = 0;
            const double x = std::stod(r[c], &used);
            if (r[c].find_first_not_of(" \t", used) != std::string::npos)
                throw std::invalid_argument("csv: '" + r[c] + "' is not a number");
            v.push_back(x);
        }
        return v;
    }
};

/// RFC 4180 records; quoted fields may hold commas, doubled quotes and line breaks.
inline std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
    std::vector<std::vector<std::string>> recs;
    std::vector<std::string> rec;
    std::string cur;
    bool quoted = false, any = false;
    auto end_record = [&] {
        rec.push_back(cur);
        cur.clear();
        if (any || rec.size() > 1 || !rec.front().empty()) recs.push_back(rec);
        rec.clear();
        any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') cur += '"', ++i;
            else if (ch == '"') quoted = false;
            else cur += ch;
        } else if (ch == '"') {
            quoted = any = true;
        } else if (ch == ',') {
            rec.push_back(cur);
            cur.clear();
        } else if (ch == '\n') {
            end_record();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
    if (!cur.empty() || !rec.empty() || any) end_record();
    return recs;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    auto r = parse_csv_records(line);
    return r.empty() ? std::vector<std::string>{""} : r.front();
}

inline CsvTable parse_csv(const std::string& text) {
    auto recs = parse_csv_records(text);
    if (recs.empty()) throw std::invalid_argument("csv: missing header row");
    CsvTable t;
    t.header = std::move(recs.front());
    t.rows.assign(std::make_move_iterator(recs.begin() + 1), std::make_move_iterator(recs.end()));
    return t;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string r = "\"";
    for (char c : s) r += c == '"' ? std::string("\"\"") : std::string(1, c);
    return r + "\"";
}

inline std::string to_csv(const CsvTable& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + csv_escape(v[i]);
        out += "\r\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

// ---------------------------------------------------------------- SVG

inline std::string xml_escape(const std::string& s) {
    std::string r;
    for (char c : s) {
        switch (c) {
            case '<': r += "&lt;"; break;
            case '>': r += "&gt;"; break;
            case '&': r += "&amp;"; break;
            case '"': r += "&quot;"; break;
            default: r += c;
        }
    }
    return r;
}

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    bool markers = true;
    bool line = true;
    std::string color = "#1f4e9c";
};

struct PlotStyle {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    int width = 640, height = 420;
};

/// Static vector plot; identical input gives identical bytes.
inline std::string emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& st) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    std::size_t npts = 0;
    auto tx = [&](double v) { return st.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return st.logy ? std::log10(v) : v; };
    auto skip = [&](double x, double y) {
        return !std::isfinite(x) || !std::isfinite(y) || (st.logx && !(x > 0)) || (st.logy && !(y > 0));
    };
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("emit_plot: x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (skip(s.x[i], s.y[i])) continue;
            xmin = std::min(xmin, tx(s.x[i])), xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i])), ymax = std::max(ymax, ty(s.y[i]));
            ++npts;
        }
    }
    if (npts == 0) throw EmptySeries("emit_plot: nothing to draw");
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const double L = 70, R = 20, Tm = 30, B = 50;
    const double W = st.width - L - R, H = st.height - Tm - B;
    auto px = [&](double v) { return L + (tx(v) - xmin) / (xmax - xmin) * W; };
    auto py = [&](double v) { return Tm + (1.0 - (ty(v) - ymin) / (ymax - ymin)) * H; };
    char buf[256];
    std::string o;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"11\">\n",
                  st.width, st.height);
    o += buf;
    std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"#000\"/>\n",
                  L, Tm, W, H);
    o += buf;
    auto tick_label = [&](double v, bool lg) {
        std::snprintf(buf, sizeof buf, lg ? "1e%.0f" : "%.3g", v);
        return std::string(buf);
    };
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0, fy = ymin + (ymax - ymin) * i / 4.0;
        const double X = L + W * i / 4.0, Y = Tm + H * (1.0 - i / 4.0);
        const std::string lx = tick_label(fx, st.logx), ly = tick_label(fy, st.logy);
        std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%s</text>\n", X, Tm + H + 15,
                      lx.c_str());
        o += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%s</text>\n", L - 5, Y + 4,
                      ly.c_str());
        o += buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">", L + W / 2, double(st.height) - 10);
    o += buf + xml_escape(st.xlabel) + "</text>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"15\" y=\"%.2f\" transform=\"rotate(-90 15 %.2f)\" text-anchor=\"middle\">",
                  Tm + H / 2, Tm + H / 2);
    o += buf + xml_escape(st.ylabel) + "</text>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"18\" text-anchor=\"middle\">", L + W / 2);
    o += buf + xml_escape(st.title) + "</text>\n";
    int legend = 0;
    for (const auto& s : series) {
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (skip(s.x[i], s.y[i])) continue;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
            pts += buf;
            if (s.markers) {
                std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", px(s.x[i]),
                              py(s.y[i]), s.color.c_str());
                o += buf;
            }
        }
        if (s.line && !pts.empty())
            o += "<polyline fill=\"none\" stroke=\"" + xml_escape(s.color) + "\" points=\"" + pts + "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" fill=\"%s\">", L + 8, Tm + 14 + 14.0 * legend++,
                      s.color.c_str());
        o += buf + xml_escape(s.label) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

// ---------------------------------------------------------------- output

/// Output directory: explicit argument, then MW_OUTPUT_DIR, then the working directory.
inline std::filesystem::path output_dir(const std::string& explicit_dir = "") {
    std::filesystem::path p = explicit_dir;
    if (p.empty()) {
        const char* env = std::getenv("MW_OUTPUT_DIR");
        p = env && *env ? env : ".";
    }
    std::filesystem::create_directories(p);
    return p;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

#ifdef MW_DATA_DIR
inline std::string data_path(const std::string& name) { return std::string(MW_DATA_DIR) + "/" + name; }
#endif

}  // namespace mw
