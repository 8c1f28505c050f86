#pragma once

#include "vesselgen/tree.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vesselgen {

// Arc length / chord length of a polyline; nullopt when the endpoints
// coincide (the caller logs and skips such branches).
std::optional<double> tortuosity(std::span<const NodeAttr> polyline);

double total_length(const VesselTree& t);
double avg_radius(const VesselTree& t);

// Uniform-bin histogram over [lo, hi].
struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> counts;

    double bin_width() const { return (hi - lo) / counts.size(); }
    std::vector<double> mass() const; // counts normalized to sum 1
};

struct HistogramComparison {
    Histogram real;
    Histogram gen;
    double cosine_similarity = 0.0; // between count vectors
    double emd = 0.0;               // sum |CDF_real - CDF_gen| * bin width
};

// Shared uniform binning over the combined range of both samples.
HistogramComparison histogram_metrics(std::span<const double> real_values,
                                      std::span<const double> gen_values, int bins = 50);

// 3-D centerline point cloud: `n` arc-length-uniform points, allocated to
// branches proportionally to branch length. Radii are not included.
std::vector<std::array<double, 3>> tree_point_cloud(const VesselTree& t, int n = 256);

// Symmetric Chamfer distance between the 256-point centerline clouds:
// mean nearest-neighbor squared distance in both directions, summed.
double tree_distance(const VesselTree& a, const VesselTree& b);
double cloud_distance(std::span<const std::array<double, 3>> a,
                      std::span<const std::array<double, 3>> b);

struct SetMetrics {
    double mmd = 0.0;     // mean over real of min distance to gen
    double coverage = 0.0; // fraction of real matched as nearest by >= 1 gen
    double one_nna = 0.5; // leave-one-out 1-NN accuracy over the union
};

SetMetrics set_metrics(std::span<const VesselTree> real, std::span<const VesselTree> gen);

// Pooled per-set sample vectors: tortuosity over all branches of all trees;
// total length and average radius one value per tree.
struct MorphometrySamples {
    std::vector<double> tortuosity;
    std::vector<double> length;
    std::vector<double> radius;
    int skipped_branches = 0; // coincident-endpoint branches
};
MorphometrySamples morphometry(std::span<const VesselTree> trees);

struct MetricsReport {
    HistogramComparison radius;
    HistogramComparison tort;
    HistogramComparison length;
    SetMetrics sets;
    int skipped_real_branches = 0;
    int skipped_gen_branches = 0;
};

MetricsReport evaluate_sets(std::span<const VesselTree> real, std::span<const VesselTree> gen,
                            int bins = 50);

// report.csv (metric,value rows) plus one histogram CSV per morphometric.
void write_report_csv(const MetricsReport& report, const std::string& dir);

bool report_has_nan(const MetricsReport& report);

} // namespace vesselgen
