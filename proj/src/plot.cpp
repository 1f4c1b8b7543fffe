#include "awe/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace awe::plot {

namespace fs = std::filesystem;

Trajectory load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlotError("cannot open trajectory: " + path);
    std::string header;
    if (!std::getline(in, header)) throw PlotError("empty trajectory file: " + path);

    // Map needed columns by name so column order stays flexible.
    std::vector<std::string> cols;
    {
        std::istringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    auto col = [&cols, &path](const std::string& name) {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) throw PlotError("missing column '" + name + "' in " + path);
        return static_cast<size_t>(it - cols.begin());
    };
    size_t ct = col("t"), cph = col("phase"), cx = col("x"), cy = col("y"), cz = col("z");
    size_t ca = col("alpha_deg"), cp = col("psi_deg"), cb = col("beta_rad"),
           cw = col("power_kW");

    Trajectory tr;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string v;
        while (std::getline(ls, v, ',')) f.push_back(v);
        if (f.size() < cols.size()) throw PlotError("short row in " + path);
        tr.t.push_back(std::stod(f[ct]));
        tr.phase.push_back(f[cph]);
        tr.x.push_back(std::stod(f[cx]));
        tr.y.push_back(std::stod(f[cy]));
        tr.z.push_back(std::stod(f[cz]));
        tr.alpha_deg.push_back(std::stod(f[ca]));
        tr.psi_deg.push_back(std::stod(f[cp]));
        tr.beta_rad.push_back(std::stod(f[cb]));
        tr.power_kw.push_back(std::stod(f[cw]));
    }
    if (tr.t.empty()) throw PlotError("trajectory has no data rows: " + path);
    return tr;
}

namespace {

struct Axis {
    double lo = 0.0, hi = 1.0;
    double px0 = 0.0, px1 = 1.0;

    void fit(const std::vector<double>& v) {
        lo = *std::min_element(v.begin(), v.end());
        hi = *std::max_element(v.begin(), v.end());
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    double map(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void polyline(std::ostringstream& svg, const std::vector<double>& xs,
              const std::vector<double>& ys, const Axis& ax, const Axis& ay,
              const std::string& color) {
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i)
        svg << fmt(ax.map(xs[i])) << ',' << fmt(ay.map(ys[i])) << ' ';
    svg << "\"/>\n";
}

void frame(std::ostringstream& svg, int w, int h, const std::string& title,
           const std::string& xlabel, const std::string& ylabel) {
    svg << "<rect x=\"40\" y=\"20\" width=\"" << w - 60 << "\" height=\"" << h - 60
        << "\" fill=\"none\" stroke=\"#888\"/>\n"
        << "<text x=\"" << w / 2 << "\" y=\"14\" text-anchor=\"middle\" font-size=\"12\">"
        << title << "</text>\n"
        << "<text x=\"" << w / 2 << "\" y=\"" << h - 6
        << "\" text-anchor=\"middle\" font-size=\"10\">" << xlabel << "</text>\n"
        << "<text x=\"12\" y=\"" << h / 2 << "\" font-size=\"10\" transform=\"rotate(-90 12 "
        << h / 2 << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
}

std::string svg_doc(int w, int h, const std::string& body) {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body << "</svg>\n";
    return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw PlotError("cannot write " + p.string());
    out << content;
}

}  // namespace

std::vector<std::string> render_trajectory(const std::string& csv_path,
                                           const std::string& out_dir) {
    Trajectory tr = load_trajectory_csv(csv_path);
    fs::create_directories(out_dir);
    std::string stem = fs::path(csv_path).stem().string();
    std::vector<std::string> written;

    const int w = 800, h = 400;

    // Two planar projections of the flight path, side by side.
    {
        std::ostringstream svg;
        Axis ax1{.px0 = 40, .px1 = w / 2.0 - 20};
        Axis ay1{.px0 = h - 40.0, .px1 = 20};
        ax1.fit(tr.x);
        ay1.fit(tr.y);
        frame(svg, w / 2, h, "ground track", "x [m]", "y [m]");
        polyline(svg, tr.x, tr.y, ax1, ay1, "#1f77b4");

        Axis ax2{.px0 = w / 2.0 + 40, .px1 = w - 20.0};
        Axis ay2{.px0 = h - 40.0, .px1 = 20};
        ax2.fit(tr.x);
        ay2.fit(tr.z);
        svg << "<rect x=\"" << w / 2 + 40 << "\" y=\"20\" width=\"" << w / 2 - 60
            << "\" height=\"" << h - 60 << "\" fill=\"none\" stroke=\"#888\"/>\n"
            << "<text x=\"" << 3 * w / 4 << "\" y=\"14\" text-anchor=\"middle\" "
               "font-size=\"12\">side view</text>\n"
            << "<text x=\"" << 3 * w / 4 << "\" y=\"" << h - 6
            << "\" text-anchor=\"middle\" font-size=\"10\">x [m]</text>\n";
        polyline(svg, tr.x, tr.z, ax2, ay2, "#d62728");
        fs::path p = fs::path(out_dir) / (stem + "_path.svg");
        write_file(p, svg_doc(w, h, svg.str()));
        written.push_back(p.string());
    }

    // Control angles and beta vs time.
    {
        std::ostringstream svg;
        Axis ax{.px0 = 40, .px1 = w - 20.0};
        Axis ay{.px0 = h - 40.0, .px1 = 20};
        ax.fit(tr.t);
        std::vector<double> beta_deg(tr.beta_rad.size());
        for (size_t i = 0; i < beta_deg.size(); ++i) beta_deg[i] = tr.beta_rad[i] * 180.0 / M_PI;
        std::vector<double> all = tr.alpha_deg;
        all.insert(all.end(), tr.psi_deg.begin(), tr.psi_deg.end());
        all.insert(all.end(), beta_deg.begin(), beta_deg.end());
        ay.fit(all);
        frame(svg, w, h, "controls and relative-wind angle", "t [s]", "deg");
        polyline(svg, tr.t, tr.alpha_deg, ax, ay, "#1f77b4");
        polyline(svg, tr.t, tr.psi_deg, ax, ay, "#2ca02c");
        polyline(svg, tr.t, beta_deg, ax, ay, "#d62728");
        svg << "<text x=\"60\" y=\"32\" font-size=\"10\" fill=\"#1f77b4\">alpha</text>"
            << "<text x=\"110\" y=\"32\" font-size=\"10\" fill=\"#2ca02c\">psi</text>"
            << "<text x=\"150\" y=\"32\" font-size=\"10\" fill=\"#d62728\">beta</text>\n";
        fs::path p = fs::path(out_dir) / (stem + "_controls.svg");
        write_file(p, svg_doc(w, h, svg.str()));
        written.push_back(p.string());
    }

    // Power trace.
    {
        std::ostringstream svg;
        Axis ax{.px0 = 40, .px1 = w - 20.0};
        Axis ay{.px0 = h - 40.0, .px1 = 20};
        ax.fit(tr.t);
        ay.fit(tr.power_kw);
        frame(svg, w, h, "power", "t [s]", "kW");
        polyline(svg, tr.t, tr.power_kw, ax, ay, "#1f77b4");
        fs::path p = fs::path(out_dir) / (stem + "_power.svg");
        write_file(p, svg_doc(w, h, svg.str()));
        written.push_back(p.string());
    }
    return written;
}

}  // namespace awe::plot
