#include "plots.hpp"

#include "format.hpp"

#include <protolink/error.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace protolink::app {

namespace fs = std::filesystem;

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorCode::MalformedRecord, "missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
    double num(std::size_t row, const std::string& name) const { return std::stod(rows[row][column(name)]); }
    const std::string& str(std::size_t row, const std::string& name) const { return rows[row][column(name)]; }
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Table read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string() + " (run evaluate first)");
    Table t;
    std::string line;
    if (std::getline(in, line)) t.header = split_csv(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != t.header.size()) {
            throw Error(ErrorCode::MalformedRecord, path.string() + ": row width differs from header");
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

/// Minimal SVG canvas with one plotting area and linear axes.
class Svg {
public:
    Svg(double width, double height, std::string title) : w_(width), h_(height) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
             << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(w_ / 2, 18, title, "middle", 13);
    }

    void set_area(double x0, double x1, double y0, double y1) {
        x0_ = x0;
        x1_ = x1 > x0 ? x1 : x0 + 1;
        y0_ = y0;
        y1_ = y1 > y0 ? y1 : y0 + 1;
    }
    double px(double x) const { return left_ + (x - x0_) / (x1_ - x0_) * (w_ - left_ - right_); }
    double py(double y) const { return h_ - bottom_ + -(y - y0_) / (y1_ - y0_) * (h_ - top_ - bottom_); }

    void axes(const std::string& xlabel, const std::string& ylabel, int yticks = 5) {
        line(px(x0_), py(y0_), px(x1_), py(y0_), "black");
        line(px(x0_), py(y0_), px(x0_), py(y1_), "black");
        for (int i = 0; i <= yticks; ++i) {
            const double y = y0_ + (y1_ - y0_) * i / yticks;
            line(px(x0_) - 4, py(y), px(x0_), py(y), "black");
            text(px(x0_) - 6, py(y) + 4, fixed(y), "end");
        }
        text((px(x0_) + px(x1_)) / 2, h_ - 8, xlabel, "middle");
        out_ << "<text x=\"14\" y=\"" << (py(y0_) + py(y1_)) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
             << (py(y0_) + py(y1_)) / 2 << ")\">" << escape(ylabel) << "</text>\n";
    }

    void line(double xa, double ya, double xb, double yb, const std::string& color, double width = 1) {
        out_ << "<line x1=\"" << xa << "\" y1=\"" << ya << "\" x2=\"" << xb << "\" y2=\"" << yb << "\" stroke=\""
             << color << "\" stroke-width=\"" << width << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts) out_ << px(x) << ',' << py(y) << ' ';
        out_ << "\"/>\n";
    }
    void dot(double x, double y, const std::string& color, double r = 2) {
        out_ << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << r << "\" fill=\"" << color << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, double opacity = 1) {
        out_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h << "\" fill=\"" << fill
             << "\" fill-opacity=\"" << opacity << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, const std::string& anchor = "start", int size = 11) {
        out_ << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor << "\" font-size=\"" << size
             << "\">" << escape(s) << "</text>\n";
    }
    void legend(const std::vector<std::string>& labels) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double y = top_ + 4 + 14 * static_cast<double>(i);
            rect(w_ - right_ - 110, y - 8, 10, 10, kPalette[i % kPalette.size()]);
            text(w_ - right_ - 96, y + 1, labels[i]);
        }
    }

    void save(const fs::path& path) {
        out_ << "</svg>\n";
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw Error(ErrorCode::Io, "cannot open for writing: " + path.string());
        f << out_.str();
    }

    double left_ = 60, right_ = 20, top_ = 30, bottom_ = 40;

private:
    std::ostringstream out_;
    double w_, h_;
    double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
};

void plot_topk(const Table& t, const fs::path& out) {
    // x positions are the rank of k, labels show the k itself.
    std::vector<double> ks;
    std::map<std::string, std::map<double, double>> series;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double k = t.num(r, "k");
        if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
        series[t.str(r, "mode")][k] = t.num(r, "r_at_1");
    }
    std::sort(ks.begin(), ks.end());
    Svg svg(640, 400, "R@1 after reranking the top-k alias candidates");
    svg.set_area(0, ks.empty() ? 1 : static_cast<double>(ks.size() - 1), 0, 1);
    svg.axes("top-k", "R@1");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        svg.text(svg.px(static_cast<double>(i)), svg.py(0) + 14, format_double(ks[i]), "middle");
    }
    std::vector<std::string> labels;
    std::size_t s = 0;
    for (const auto& [mode, pts] : series) {
        std::vector<std::pair<double, double>> line;
        for (const auto& [k, v] : pts) {
            const auto x = static_cast<double>(std::find(ks.begin(), ks.end(), k) - ks.begin());
            line.emplace_back(x, v);
            svg.dot(x, v, kPalette[s % kPalette.size()], 3);
        }
        svg.polyline(line, kPalette[s % kPalette.size()]);
        labels.push_back(mode);
        ++s;
    }
    svg.legend(labels);
    svg.save(out);
}

void plot_transition(const Table& t, const fs::path& out) {
    static const std::array<std::string, 3> names{"exact", "related", "missed"};
    Svg svg(420, 400, "Outcome transitions (row %)");
    const double x0 = 110, y0 = 70, cell = 90;
    for (std::size_t c = 0; c < 3; ++c) svg.text(x0 + cell * (c + 0.5), y0 - 8, names[c], "middle");
    svg.text(x0 + cell * 1.5, y0 - 28, "after", "middle");
    for (std::size_t r = 0; r < t.rows.size() && r < 3; ++r) {
        svg.text(x0 - 8, y0 + cell * (r + 0.5) + 4, t.str(r, "from"), "end");
        for (std::size_t c = 0; c < 3; ++c) {
            const double pct = t.num(r, "pct_" + names[c]);
            svg.rect(x0 + cell * c, y0 + cell * r, cell, cell, "#08519c", 0.1 + 0.9 * pct / 100.0);
            svg.text(x0 + cell * (c + 0.5), y0 + cell * (r + 0.5) + 4,
                     fixed(pct, 1) + "% (" + t.str(r, "to_" + names[c]) + ")", "middle");
        }
    }
    svg.text(20, y0 + cell * 1.5, "before", "start");
    svg.save(out);
}

void plot_similarity(const Table& t, const fs::path& out) {
    Svg svg(720, 420, "Similarity difference and smoothed per-article R@1");
    const double n = static_cast<double>(t.rows.size());
    double lo = 0, hi = 1;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        lo = std::min(lo, t.num(r, "diff"));
        hi = std::max(hi, t.num(r, "diff"));
    }
    svg.set_area(0, std::max(1.0, n - 1), lo, hi);
    svg.axes("articles ordered by S_G - S_P", "value");
    std::vector<std::pair<double, double>> r1, r1rr;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double x = static_cast<double>(r);
        const std::string& region = t.str(r, "region");
        if (region == "A" || region == "B") {
            const double w = std::max(1.0, svg.px(1) - svg.px(0));
            svg.rect(svg.px(x) - w / 2, svg.py(hi), w, svg.py(lo) - svg.py(hi), region == "A" ? "#fdd0a2" : "#c6dbef");
        }
        svg.dot(x, t.num(r, "diff"), "#555555", 1.5);
        r1.emplace_back(x, t.num(r, "smoothed_r1"));
        r1rr.emplace_back(x, t.num(r, "smoothed_r1_reranked"));
    }
    svg.polyline(r1, kPalette[0]);
    svg.polyline(r1rr, kPalette[1]);
    svg.legend({"smoothed R@1", "smoothed R@1 reranked"});
    svg.save(out);
}

void plot_wordcount(const Table& t, const fs::path& out) {
    Svg svg(720, 420, "Match rates by mention word count");
    std::vector<std::string> runs;
    double max_words = 1;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (std::find(runs.begin(), runs.end(), t.str(r, "run")) == runs.end()) runs.push_back(t.str(r, "run"));
        max_words = std::max(max_words, t.num(r, "words"));
    }
    svg.set_area(0.5, max_words + 0.5, 0, 1);
    svg.axes("words in mention", "rate");
    for (int wc = 1; wc <= static_cast<int>(max_words); ++wc) svg.text(svg.px(wc), svg.py(0) + 14, std::to_string(wc), "middle");
    const double slot = (svg.px(1.5) - svg.px(0.5)) * 0.8;
    const double bar = runs.empty() ? slot : slot / static_cast<double>(runs.size());
    std::vector<std::string> labels;
    for (std::size_t ri = 0; ri < runs.size(); ++ri) {
        labels.push_back(runs[ri] + " exact");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (t.str(r, "run") != runs[ri]) continue;
            const double xl = svg.px(t.num(r, "words")) - slot / 2 + bar * static_cast<double>(ri);
            const double ex = t.num(r, "exact_rate"), rel = t.num(r, "related_rate");
            svg.rect(xl, svg.py(ex), bar, svg.py(0) - svg.py(ex), kPalette[ri % kPalette.size()]);
            svg.rect(xl, svg.py(ex + rel), bar, svg.py(ex) - svg.py(ex + rel), kPalette[ri % kPalette.size()], 0.35);
        }
    }
    svg.legend(labels);
    svg.save(out);
}

} // namespace

void render_all_plots(const fs::path& eval_dir, const fs::path& plot_dir) {
    plot_topk(read_csv(eval_dir / "topk_sweep.csv"), plot_dir / "topk.svg");
    plot_transition(read_csv(eval_dir / "transition.csv"), plot_dir / "transition.svg");
    plot_similarity(read_csv(eval_dir / "article_similarity.csv"), plot_dir / "similarity.svg");
    plot_wordcount(read_csv(eval_dir / "wordcount.csv"), plot_dir / "wordcount.svg");
}

} // namespace protolink::app
