#include "vesselgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace vesselgen {

namespace {

double dist(const NodeAttr& a, const NodeAttr& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

} // namespace

std::optional<double> tortuosity(std::span<const NodeAttr> polyline) {
    if (polyline.size() < 2) return std::nullopt;
    const double chord = dist(polyline.front(), polyline.back());
    if (chord <= 0.0) return std::nullopt;
    double arc = 0.0;
    for (std::size_t i = 1; i < polyline.size(); ++i) arc += dist(polyline[i - 1], polyline[i]);
    return arc / chord;
}

double total_length(const VesselTree& t) {
    double sum = 0.0;
    for (int p = 0; p < t.size(); ++p) {
        for (int c : {t.left[p], t.right[p]}) {
            if (c != -1) sum += dist(t.attrs[p], t.attrs[c]);
        }
    }
    return sum;
}

double avg_radius(const VesselTree& t) {
    double sum = 0.0;
    for (const auto& a : t.attrs) sum += a.r;
    return sum / t.size();
}

std::vector<double> Histogram::mass() const {
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> m(counts.size(), 0.0);
    if (total > 0.0) {
        for (std::size_t i = 0; i < counts.size(); ++i) m[i] = counts[i] / total;
    }
    return m;
}

HistogramComparison histogram_metrics(std::span<const double> real_values,
                                      std::span<const double> gen_values, int bins) {
    if (real_values.empty() || gen_values.empty())
        throw std::runtime_error("histogram_metrics: empty input");
    if (bins < 1) throw std::runtime_error("histogram_metrics: bins must be >= 1");

    double lo = real_values[0], hi = real_values[0];
    for (double v : real_values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : gen_values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // Degenerate combined range: everything falls in one shared bin.
    if (!(hi > lo)) {
        hi = lo + 1.0;
        bins = 1;
    }

    HistogramComparison cmp;
    for (Histogram* h : {&cmp.real, &cmp.gen}) {
        h->lo = lo;
        h->hi = hi;
        h->counts.assign(bins, 0.0);
    }
    auto fill = [&](Histogram& h, std::span<const double> values) {
        for (double v : values) {
            int b = static_cast<int>((v - lo) / (hi - lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            h.counts[b] += 1.0;
        }
    };
    fill(cmp.real, real_values);
    fill(cmp.gen, gen_values);

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int b = 0; b < bins; ++b) {
        dot += cmp.real.counts[b] * cmp.gen.counts[b];
        na += cmp.real.counts[b] * cmp.real.counts[b];
        nb += cmp.gen.counts[b] * cmp.gen.counts[b];
    }
    // sqrt(na * nb) keeps identical count vectors at exactly 1.
    cmp.cosine_similarity = dot / std::sqrt(na * nb);

    const auto mr = cmp.real.mass();
    const auto mg = cmp.gen.mass();
    double cdf_r = 0.0, cdf_g = 0.0, emd = 0.0;
    for (int b = 0; b < bins; ++b) {
        cdf_r += mr[b];
        cdf_g += mg[b];
        emd += std::abs(cdf_r - cdf_g);
    }
    cmp.emd = emd * cmp.real.bin_width();
    return cmp;
}

std::vector<std::array<double, 3>> tree_point_cloud(const VesselTree& t, int n) {
    if (t.size() < 2) throw std::runtime_error("tree_point_cloud: tree must have >= 2 nodes");
    const auto branches = branch_decomposition(t);

    std::vector<double> lengths;
    lengths.reserve(branches.size());
    double total = 0.0;
    for (const auto& br : branches) {
        double len = 0.0;
        for (std::size_t i = 1; i < br.size(); ++i) len += dist(t.attrs[br[i - 1]], t.attrs[br[i]]);
        lengths.push_back(len);
        total += len;
    }

    // Allocate points proportionally to branch length (largest remainder),
    // at least 1 per branch.
    const int nb = static_cast<int>(branches.size());
    std::vector<int> alloc(nb, 1);
    int assigned = nb;
    if (total > 0.0) {
        std::vector<std::pair<double, int>> frac(nb);
        for (int i = 0; i < nb; ++i) {
            const double want = lengths[i] / total * (n - nb);
            alloc[i] += static_cast<int>(want);
            assigned += static_cast<int>(want);
            frac[i] = {want - static_cast<int>(want), i};
        }
        std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
            return a.first > b.first || (a.first == b.first && a.second < b.second);
        });
        for (int i = 0; assigned < n && i < nb; ++i, ++assigned) ++alloc[frac[i].second];
    }

    std::vector<std::array<double, 3>> cloud;
    cloud.reserve(n);
    for (int bi = 0; bi < nb; ++bi) {
        const auto& br = branches[bi];
        const int k = alloc[bi];
        // k arc-length-uniform points from start to end inclusive.
        for (int s = 0; s < k; ++s) {
            const double target = lengths[bi] * (k == 1 ? 0.5 : static_cast<double>(s) / (k - 1));
            double walked = 0.0;
            std::array<double, 3> p{t.attrs[br.back()].x, t.attrs[br.back()].y,
                                    t.attrs[br.back()].z};
            for (std::size_t i = 1; i < br.size(); ++i) {
                const auto& a = t.attrs[br[i - 1]];
                const auto& b = t.attrs[br[i]];
                const double seg = dist(a, b);
                if (walked + seg >= target || i + 1 == br.size()) {
                    const double u = seg > 0.0 ? std::clamp((target - walked) / seg, 0.0, 1.0) : 0.0;
                    p = {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), a.z + u * (b.z - a.z)};
                    break;
                }
                walked += seg;
            }
            cloud.push_back(p);
        }
    }
    return cloud;
}

double cloud_distance(std::span<const std::array<double, 3>> a,
                      std::span<const std::array<double, 3>> b) {
    auto directional = [](std::span<const std::array<double, 3>> from,
                          std::span<const std::array<double, 3>> to) {
        double sum = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
                best = std::min(best, dx * dx + dy * dy + dz * dz);
            }
            sum += best;
        }
        return sum / from.size();
    };
    return directional(a, b) + directional(b, a);
}

double tree_distance(const VesselTree& a, const VesselTree& b) {
    const auto ca = tree_point_cloud(a);
    const auto cb = tree_point_cloud(b);
    return cloud_distance(ca, cb);
}

namespace {

using Cloud = std::vector<std::array<double, 3>>;

std::vector<Cloud> clouds_of(std::span<const VesselTree> trees) {
    std::vector<Cloud> out;
    out.reserve(trees.size());
    for (const auto& t : trees) out.push_back(tree_point_cloud(t));
    return out;
}

} // namespace

SetMetrics set_metrics(std::span<const VesselTree> real, std::span<const VesselTree> gen) {
    if (real.empty() || gen.empty()) throw std::runtime_error("set_metrics: empty set");
    const auto rc = clouds_of(real);
    const auto gc = clouds_of(gen);
    const int nr = static_cast<int>(rc.size());
    const int ng = static_cast<int>(gc.size());

    // Cross distances real x gen.
    std::vector<double> cross(static_cast<std::size_t>(nr) * ng);
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < ng; ++j) cross[static_cast<std::size_t>(i) * ng + j] = cloud_distance(rc[i], gc[j]);
    }

    SetMetrics sm;

    double mmd = 0.0;
    for (int i = 0; i < nr; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < ng; ++j) best = std::min(best, cross[static_cast<std::size_t>(i) * ng + j]);
        mmd += best;
    }
    sm.mmd = mmd / nr;

    std::vector<char> matched(nr, 0);
    for (int j = 0; j < ng; ++j) {
        int arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nr; ++i) {
            const double d = cross[static_cast<std::size_t>(i) * ng + j];
            if (d < best) {
                best = d;
                arg = i;
            }
        }
        matched[arg] = 1;
    }
    int covered = 0;
    for (char m : matched) covered += m;
    sm.coverage = static_cast<double>(covered) / nr;

    // Leave-one-out 1-NN over the labeled union. A strictly smaller distance
    // wins; an exact tie counts as a misclassification.
    auto same_set_min = [](const std::vector<Cloud>& set) {
        const int n = static_cast<int>(set.size());
        std::vector<double> best(n, std::numeric_limits<double>::infinity());
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double d = cloud_distance(set[i], set[j]);
                best[i] = std::min(best[i], d);
                best[j] = std::min(best[j], d);
            }
        }
        return best;
    };
    const auto rr_min = same_set_min(rc);
    const auto gg_min = same_set_min(gc);

    int correct = 0;
    for (int i = 0; i < nr; ++i) {
        double best_other = std::numeric_limits<double>::infinity();
        for (int j = 0; j < ng; ++j)
            best_other = std::min(best_other, cross[static_cast<std::size_t>(i) * ng + j]);
        if (rr_min[i] < best_other) ++correct;
    }
    for (int j = 0; j < ng; ++j) {
        double best_other = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nr; ++i)
            best_other = std::min(best_other, cross[static_cast<std::size_t>(i) * ng + j]);
        if (gg_min[j] < best_other) ++correct;
    }
    sm.one_nna = static_cast<double>(correct) / (nr + ng);
    return sm;
}

MorphometrySamples morphometry(std::span<const VesselTree> trees) {
    MorphometrySamples ms;
    for (const auto& t : trees) {
        for (const auto& br : branch_decomposition(t)) {
            std::vector<NodeAttr> pts;
            pts.reserve(br.size());
            for (int idx : br) pts.push_back(t.attrs[idx]);
            if (const auto tort = tortuosity(pts)) {
                ms.tortuosity.push_back(*tort);
            } else {
                ++ms.skipped_branches;
            }
        }
        ms.length.push_back(total_length(t));
        ms.radius.push_back(avg_radius(t));
    }
    return ms;
}

MetricsReport evaluate_sets(std::span<const VesselTree> real, std::span<const VesselTree> gen,
                            int bins) {
    const auto mr = morphometry(real);
    const auto mg = morphometry(gen);
    MetricsReport rep;
    rep.radius = histogram_metrics(mr.radius, mg.radius, bins);
    rep.tort = histogram_metrics(mr.tortuosity, mg.tortuosity, bins);
    rep.length = histogram_metrics(mr.length, mg.length, bins);
    rep.sets = set_metrics(real, gen);
    rep.skipped_real_branches = mr.skipped_branches;
    rep.skipped_gen_branches = mg.skipped_branches;
    return rep;
}

namespace {

void write_histogram_csv(const std::filesystem::path& path, const HistogramComparison& cmp) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "bin_left,bin_right,real_mass,gen_mass\n";
    const auto mr = cmp.real.mass();
    const auto mg = cmp.gen.mass();
    char buf[160];
    for (std::size_t b = 0; b < mr.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g\n",
                      cmp.real.lo + b * cmp.real.bin_width(),
                      cmp.real.lo + (b + 1) * cmp.real.bin_width(), mr[b], mg[b]);
        os << buf;
    }
}

} // namespace

void write_report_csv(const MetricsReport& report, const std::string& dir) {
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    {
        std::ofstream os(d / "report.csv");
        if (!os) throw std::runtime_error("cannot write report.csv");
        os << "# tree distance: symmetric chamfer on 256 centerline points (radius excluded)\n";
        os << "metric,value\n";
        char buf[96];
        auto row = [&](const char* name, double v) {
            std::snprintf(buf, sizeof buf, "%s,%.9g\n", name, v);
            os << buf;
        };
        row("cs_radius", report.radius.cosine_similarity);
        row("cs_tortuosity", report.tort.cosine_similarity);
        row("cs_length", report.length.cosine_similarity);
        row("emd_radius", report.radius.emd);
        row("emd_tortuosity", report.tort.emd);
        row("emd_length", report.length.emd);
        row("mmd", report.sets.mmd);
        row("cov", report.sets.coverage);
        row("1nna", report.sets.one_nna);
    }
    write_histogram_csv(d / "radius_hist.csv", report.radius);
    write_histogram_csv(d / "tortuosity_hist.csv", report.tort);
    write_histogram_csv(d / "length_hist.csv", report.length);
}

bool report_has_nan(const MetricsReport& report) {
    for (double v : {report.radius.cosine_similarity, report.tort.cosine_similarity,
                     report.length.cosine_similarity, report.radius.emd, report.tort.emd,
                     report.length.emd, report.sets.mmd, report.sets.coverage,
                     report.sets.one_nna}) {
        if (!std::isfinite(v)) return true;
    }
    return false;
}

} // namespace vesselgen
