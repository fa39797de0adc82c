#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "swarm/errors.hpp"

namespace swarm::data {

enum class SeriesKind : std::uint8_t { PV = 0, Gas = 1, WellLog = 2 };

std::string kind_name(SeriesKind kind);
SeriesKind kind_from_name(const std::string& name);

/// One site's series with named columns. Rows are in time (or depth) order.
struct SeriesDataset {
    std::string label;
    SeriesKind kind = SeriesKind::PV;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows x columns
    std::string target_column;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index column_index(const std::string& name) const;
    Eigen::VectorXd column(const std::string& name) const { return values.col(column_index(name)); }
};

/// Calibration row for one synthetic site: series length and the target
/// column's moments the generator aims for.
struct SiteProfile {
    const char* label;
    Eigen::Index count;
    double mean;
    double stddev;
    double min;
    double max;
};

const SiteProfile& site_profile(SeriesKind kind, const std::string& label);
std::vector<std::string> site_labels(SeriesKind kind);

/// Deterministic synthetic series for one site.
///
/// PV: hourly daylight load (12 samples per day, zero at the 6:00 edge)
/// with correlated irradiance/cloud/temperature/humidity channels. Gas:
/// daily volume and production time with shut-in episodes, declining trend
/// and wellhead pressures. WellLog: depth-indexed GR/AT30/RHOZ curves and
/// the DTSM target driven by a shared layered lithology process.
///
/// The target column's sample mean and standard deviation are calibrated to
/// the site profile (and clipped to its min/max range); `length == 0` uses
/// the profile's own count.
SeriesDataset gen_series(SeriesKind kind, const std::string& label, std::uint64_t seed,
                         Eigen::Index length = 0);

/// CSV with a header row; floats use max-precision round-trip formatting.
std::string dataset_to_csv(const SeriesDataset& dataset);
SeriesDataset dataset_from_csv(const std::string& text, SeriesKind kind, const std::string& label,
                               const std::string& target_column);

}  // namespace swarm::data
