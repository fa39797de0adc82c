#include "swarm/data/series.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>

#include "swarm/rng.hpp"

namespace swarm::data {

std::string kind_name(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::PV: return "pv";
        case SeriesKind::Gas: return "gas";
        case SeriesKind::WellLog: return "welllog";
    }
    throw Error("unknown series kind");
}

SeriesKind kind_from_name(const std::string& name) {
    if (name == "pv") return SeriesKind::PV;
    if (name == "gas") return SeriesKind::Gas;
    if (name == "welllog") return SeriesKind::WellLog;
    throw Error("unknown series kind: " + name);
}

Eigen::Index SeriesDataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<Eigen::Index>(i);
    throw Error("dataset " + label + " has no column " + name);
}

namespace {

// Site calibration tables: per-label series length and target moments the
// generators aim for (load for PV, daily capacity for gas, DTSM for logs).
constexpr SiteProfile kPvSites[] = {
    {"P1", 6468, 1065.97, 1070.05, 0.0, 3817.00},   {"P2", 6480, 1200.97, 1170.76, 0.0, 4203.00},
    {"P3", 6468, 1347.59, 1381.27, 0.0, 5673.50},   {"P4", 6468, 2087.36, 2030.18, 0.0, 7277.75},
    {"P5", 6468, 1753.56, 1656.44, 0.0, 6130.00},   {"P6", 6480, 2402.42, 2316.47, 0.0, 8303.25},
    {"P7", 6480, 2205.63, 2154.89, 0.0, 7934.20},   {"P8", 6480, 878.97, 832.93, 0.0, 3206.10},
    {"P9", 6480, 4225.77, 4060.18, 0.0, 14462.50},  {"P10", 6480, 4434.80, 4149.57, 0.0, 16354.55},
    {"P11", 6480, 4057.71, 3826.76, 0.0, 14140.83}, {"P12", 6468, 988.39, 932.54, 0.0, 3423.58},
    {"P13", 6468, 1344.53, 1297.90, 0.0, 4744.75},  {"P14", 6480, 2230.66, 2089.42, 0.0, 8057.90},
    {"P15", 6468, 1860.88, 1726.82, 0.0, 7006.54},  {"P16", 6480, 2544.77, 2453.21, 0.0, 8938.13},
    {"P17", 6468, 1750.38, 1643.22, 0.0, 5948.77},  {"P18", 6468, 1859.04, 1702.35, 0.0, 6168.91},
};

constexpr SiteProfile kGasWells[] = {
    {"W1", 3744, 19.10, 9.18, 0.0, 61.84},   {"W2", 3735, 37.84, 18.48, 0.0, 77.54},
    {"W3", 3236, 42.06, 15.37, 0.0, 70.03},  {"W4", 3745, 60.56, 25.00, 0.0, 110.10},
    {"W5", 3745, 53.12, 30.13, 0.0, 102.56}, {"W6", 3481, 17.97, 18.65, 0.0, 65.50},
    {"W7", 3590, 23.52, 17.45, 0.0, 73.73},  {"W8", 2700, 8.83, 12.77, 0.0, 47.68},
    {"W9", 3715, 23.44, 16.19, 0.0, 71.95},  {"W10", 3720, 22.22, 13.12, 0.0, 65.66},
    {"W11", 3720, 22.38, 22.34, 0.0, 81.77}, {"W12", 3582, 16.18, 23.99, 0.0, 80.75},
    {"W13", 3713, 14.68, 17.56, 0.0, 60.64}, {"W14", 3718, 18.32, 12.96, 0.0, 50.10},
    {"W15", 3725, 21.58, 16.40, 0.0, 59.74}, {"W16", 440, 15.53, 2.66, 0.0, 25.18},
    {"W17", 3679, 36.54, 15.31, 0.0, 84.93}, {"W18", 3661, 88.09, 33.23, 0.0, 136.63},
    {"W19", 3685, 48.37, 17.81, 0.0, 99.19}, {"W20", 3715, 50.01, 22.49, 0.0, 97.03},
    {"W21", 3719, 62.95, 26.56, 0.0, 113.51},{"W22", 2875, 15.94, 12.28, 0.0, 60.85},
    {"W23", 3553, 65.02, 26.96, 0.0, 112.11},{"W24", 3554, 73.75, 34.58, 0.0, 133.93},
};

constexpr SiteProfile kLogCurves[] = {
    {"A1", 2613, 104.50, 16.70, 93.98, 200.12},  {"A2", 3731, 104.34, 16.17, 87.63, 206.70},
    {"A3", 2280, 105.24, 12.65, 92.73, 193.64},  {"A4", 5546, 104.07, 14.72, 89.45, 202.55},
    {"A5", 9186, 120.00, 32.65, 88.71, 273.93},  {"A6", 2154, 102.96, 15.04, 89.53, 188.60},
    {"A7", 3886, 103.39, 15.76, 88.29, 210.41},  {"A8", 3677, 102.79, 15.05, 89.82, 208.02},
    {"A9", 2029, 102.22, 13.78, 89.45, 176.00},  {"A10", 1094, 113.59, 15.57, 96.84, 181.90},
    {"A11", 1901, 108.15, 14.19, 94.15, 206.26}, {"A12", 1911, 102.56, 12.92, 89.79, 169.61},
    {"A13", 1247, 109.92, 13.08, 93.39, 184.15}, {"A14", 2108, 104.21, 15.86, 91.82, 195.42},
    {"A15", 11287, 121.30, 30.14, 75.93, 252.34},{"A16", 3891, 103.13, 16.69, 89.61, 211.89},
    {"A17", 3729, 103.27, 10.60, 90.28, 190.29}, {"A18", 4223, 103.68, 13.64, 89.47, 199.23},
    {"A19", 17159, 176.99, 80.65, 89.06, 498.96},{"A20", 4024, 102.30, 12.54, 89.36, 199.01},
    {"A21", 4485, 103.10, 11.84, 91.32, 178.65}, {"A22", 3542, 104.57, 10.15, 90.77, 188.30},
    {"A23", 18132, 174.18, 77.79, 89.18, 416.25},{"A24", 13958, 185.57, 81.97, 84.90, 359.63},
    {"A25", 18533, 171.47, 79.63, 85.04, 406.23},{"A26", 13186, 139.46, 54.20, 66.41, 332.59},
    {"A27", 14639, 147.80, 56.27, 78.12, 321.81},{"A28", 2277, 104.46, 16.57, 91.86, 193.59},
    {"A29", 4222, 102.51, 11.88, 88.73, 183.59}, {"A30", 16923, 160.58, 65.80, 76.15, 357.58},
    {"A31", 2378, 106.43, 17.16, 91.04, 186.85}, {"A32", 3918, 104.57, 16.55, 92.01, 205.33},
    {"A33", 3879, 100.67, 12.52, 80.56, 185.24}, {"A34", 4303, 100.88, 12.71, 86.42, 196.85},
    {"A35", 4085, 103.73, 16.29, 91.13, 202.29}, {"A36", 15619, 182.49, 80.77, 90.46, 411.64},
};

std::span<const SiteProfile> profile_table(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::PV: return kPvSites;
        case SeriesKind::Gas: return kGasWells;
        case SeriesKind::WellLog: return kLogCurves;
    }
    throw Error("unknown series kind");
}

double sample_mean(const Eigen::VectorXd& v) { return v.mean(); }

double sample_std(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

/// Rescales `target` multiplicatively toward the profile mean, clipping to
/// [lo, hi] each pass so the post-clip mean converges on the target.
void calibrate_scaled(Eigen::VectorXd& target, double wanted_mean, double lo, double hi) {
    for (int pass = 0; pass < 3; ++pass) {
        const double m = sample_mean(target);
        if (m <= 0.0) break;
        target *= wanted_mean / m;
        target = target.cwiseMax(lo).cwiseMin(hi);
    }
}

/// Solves the heavy-cloud probability so the sky mixture contributes the
/// spread the site's coefficient of variation asks for, given the fixed
/// variance of the diurnal bell, the seasonal swing and the sample noise.
double solve_cloud_probability(double target_cv) {
    constexpr double kOtherFactors = 1.364 * 1.03125 * 1.0144;  // bell, season, noise
    const double wanted = (1.0 + target_cv * target_cv) / kOtherFactors;
    auto mixture = [](double p) {
        const double mean = 0.85 - 0.755 * p;       // cloudy U(0.01,0.18), clear U(0.5,1.2)
        const double second = 0.7633 - 0.7518 * p;  // E[x^2] of the mixture
        return second / (mean * mean);
    };
    double lo = 0.02, hi = 0.6;
    if (mixture(lo) >= wanted) return lo;
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mixture(mid) < wanted ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SeriesDataset gen_pv(const SiteProfile& profile, std::uint64_t seed, Eigen::Index length) {
    constexpr Eigen::Index kHoursPerDay = 12;  // samples 6:00 .. 17:00
    const Eigen::Index days = (length + kHoursPerDay - 1) / kHoursPerDay;
    Rng rng(seed);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double p_cloud = solve_cloud_probability(profile.stddev / profile.mean);

    Eigen::VectorXd load(length), ssrd(length), tcc(length), t2m(length), rh(length);
    Eigen::Index row = 0;
    for (Eigen::Index d = 0; d < days && row < length; ++d) {
        // day-level sky state: heavy-cloud vs clear mixture
        const bool cloudy = rng.uniform() < p_cloud;
        const double sky = cloudy ? rng.uniform(0.01, 0.18) : rng.uniform(0.5, 1.2);
        const double season = 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * static_cast<double>(d) / 360.0 + phase);
        for (Eigen::Index j = 0; j < kHoursPerDay && row < length; ++j, ++row) {
            const double bell = std::sin(std::numbers::pi * static_cast<double>(j) / 11.0);
            const double irr = bell * sky * season;
            load[row] = irr * std::max(0.0, 1.0 + 0.12 * rng.normal());
            ssrd[row] = std::max(0.0, irr * (1.0 + 0.05 * rng.normal()));
            tcc[row] = std::clamp(1.0 - sky + 0.08 * rng.normal(), 0.0, 1.0);
            t2m[row] = 15.0 + 10.0 * (season - 1.0) * 4.0 + 6.0 * bell * sky + rng.normal();
            rh[row] = std::clamp(45.0 + 35.0 * tcc[row] + 2.0 * rng.normal(), 5.0, 100.0);
        }
    }
    calibrate_scaled(load, profile.mean, 0.0, 1.08 * profile.max);
    calibrate_scaled(ssrd, 1.0, 0.0, 5.0);

    SeriesDataset out;
    out.label = profile.label;
    out.kind = SeriesKind::PV;
    out.columns = {"elec_num", "ssrd", "tcc", "t2m", "rh"};
    out.target_column = "elec_num";
    out.values.resize(length, 5);
    out.values.col(0) = load;
    out.values.col(1) = ssrd;
    out.values.col(2) = tcc;
    out.values.col(3) = t2m;
    out.values.col(4) = rh;
    return out;
}

SeriesDataset gen_gas(const SiteProfile& profile, std::uint64_t seed, Eigen::Index length) {
    Rng rng(seed);
    const double cv_star = profile.stddev / profile.mean;
    // Wells whose spread fits a continuous producer skip shut-ins; sparse
    // outage episodes deliver too little variance on short series.
    const double q_raw = (1.0 + 0.35 * 0.35) / (1.0 + cv_star * cv_star);
    const bool continuous = q_raw >= 0.9;
    const double q = continuous ? 1.0 : q_raw;
    const double cv_prod =
        continuous ? cv_star : std::sqrt(std::max(1e-4, (1.0 + cv_star * cv_star) * q - 1.0));
    const double decline_strength = std::min(0.8, 1.2 * cv_prod);
    const double cv_decline = 0.289 * decline_strength;
    const double cv_noise =
        std::sqrt(std::max(1e-4, (1.0 + cv_prod * cv_prod) / (1.0 + cv_decline * cv_decline) - 1.0));

    // shut-in episodes as a two-state Markov chain with ~5-day outages
    const double p_recover = 0.2;
    const double p_fail = continuous ? 0.0 : p_recover * (1.0 - q) / q;

    Eigen::VectorXd capacity(length), prod_time(length), casing(length), tubing(length);
    bool producing = rng.uniform() < q;
    double ar = rng.normal();
    const double cp0 = 25.0 + 10.0 * rng.uniform();
    const double tp0 = 15.0 + 8.0 * rng.uniform();
    for (Eigen::Index t = 0; t < length; ++t) {
        ar = 0.7 * ar + std::sqrt(1.0 - 0.49) * rng.normal();
        const double frac = static_cast<double>(t) / std::max<double>(1.0, static_cast<double>(length));
        const double decline = std::exp(-decline_strength * (frac - 0.5));
        if (producing) {
            capacity[t] = decline * std::max(0.05, 1.0 + cv_noise * ar);
            prod_time[t] = 24.0 * (0.85 + 0.15 * rng.uniform());
        } else {
            capacity[t] = 0.0;
            prod_time[t] = 0.0;
        }
        const double buildup = producing ? 1.0 : 1.15;
        casing[t] = cp0 * std::exp(-0.4 * frac) * buildup * (1.0 + 0.10 * ar + 0.05 * rng.normal());
        tubing[t] = tp0 * std::exp(-0.4 * frac) * buildup * (1.0 + 0.12 * ar + 0.05 * rng.normal());
        producing = producing ? (rng.uniform() >= p_fail) : (rng.uniform() < p_recover);
    }
    calibrate_scaled(capacity, profile.mean, 0.0, profile.max);

    SeriesDataset out;
    out.label = profile.label;
    out.kind = SeriesKind::Gas;
    out.columns = {"DHG", "PT", "CP", "TP"};
    out.target_column = "DHG";  // capacity becomes the target after preparation
    out.values.resize(length, 4);
    out.values.col(0) = capacity.cwiseProduct(prod_time);
    out.values.col(1) = prod_time;
    out.values.col(2) = casing;
    out.values.col(3) = tubing;
    return out;
}

SeriesDataset gen_welllog(const SiteProfile& profile, std::uint64_t seed, Eigen::Index length) {
    Rng rng(seed);

    // layered lithology latent in [0,1], exponentially smoothed blocks
    Eigen::VectorXd litho(length);
    double level = rng.uniform();
    double z = level;
    Eigen::Index remaining = 0;
    for (Eigen::Index t = 0; t < length; ++t) {
        if (remaining == 0) {
            level = rng.uniform();
            remaining = 15 + static_cast<Eigen::Index>(rng.index(50));
        }
        z = 0.75 * z + 0.25 * level;
        litho[t] = z;
        --remaining;
    }

    Eigen::VectorXd wobble(length);
    for (Eigen::Index t = 0; t < length; ++t) wobble[t] = 1.0 + 0.04 * rng.normal();

    // choose the exponential skew so std/(mean - min) matches the profile
    const double skew_target = profile.stddev / (profile.mean - profile.min);
    auto shape_ratio = [&](double b) {
        const Eigen::VectorXd u = (b * litho.array()).exp().matrix().cwiseProduct(wobble);
        return sample_std(u) / (sample_mean(u) - u.minCoeff());
    };
    double lo = 0.05, hi = 14.0;
    for (int it = 0; it < 48; ++it) {
        const double mid = 0.5 * (lo + hi);
        (shape_ratio(mid) < skew_target ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    Eigen::VectorXd dtsm = (b * litho.array()).exp().matrix().cwiseProduct(wobble);

    // affine calibration to the profile moments, then clip and repeat
    for (int pass = 0; pass < 3; ++pass) {
        const double alpha = profile.stddev / sample_std(dtsm);
        const double beta = profile.mean - alpha * sample_mean(dtsm);
        dtsm = (alpha * dtsm.array() + beta).cwiseMax(profile.min).cwiseMin(profile.max).matrix();
    }

    Eigen::VectorXd gr(length), at30(length), rhoz(length);
    for (Eigen::Index t = 0; t < length; ++t) {
        gr[t] = 25.0 + 125.0 * litho[t] + 4.0 * rng.normal();
        at30[t] = std::exp(3.2 - 2.2 * litho[t] + 0.12 * rng.normal());
        rhoz[t] = 2.78 - 0.5 * litho[t] + 0.025 * rng.normal();
    }

    SeriesDataset out;
    out.label = profile.label;
    out.kind = SeriesKind::WellLog;
    out.columns = {"GR", "AT30", "RHOZ", "DTSM"};
    out.target_column = "DTSM";
    out.values.resize(length, 4);
    out.values.col(0) = gr;
    out.values.col(1) = at30;
    out.values.col(2) = rhoz;
    out.values.col(3) = dtsm;
    return out;
}

}  // namespace

const SiteProfile& site_profile(SeriesKind kind, const std::string& label) {
    for (const SiteProfile& p : profile_table(kind))
        if (label == p.label) return p;
    throw Error("no site profile for label " + label);
}

std::vector<std::string> site_labels(SeriesKind kind) {
    std::vector<std::string> out;
    for (const SiteProfile& p : profile_table(kind)) out.emplace_back(p.label);
    return out;
}

SeriesDataset gen_series(SeriesKind kind, const std::string& label, std::uint64_t seed,
                         Eigen::Index length) {
    const SiteProfile& profile = site_profile(kind, label);
    if (length == 0) length = profile.count;
    if (length < 2) throw Error("series length must be at least 2");
    const std::uint64_t stream = derive_seed(seed, kind_name(kind) + ":" + label);
    switch (kind) {
        case SeriesKind::PV: return gen_pv(profile, stream, length);
        case SeriesKind::Gas: return gen_gas(profile, stream, length);
        case SeriesKind::WellLog: return gen_welllog(profile, stream, length);
    }
    throw Error("unknown series kind");
}

std::string dataset_to_csv(const SeriesDataset& dataset) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t c = 0; c < dataset.columns.size(); ++c) {
        if (c) out << ',';
        out << dataset.columns[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < dataset.rows(); ++r) {
        for (Eigen::Index c = 0; c < dataset.values.cols(); ++c) {
            if (c) out << ',';
            out << dataset.values(r, c);
        }
        out << '\n';
    }
    return out.str();
}

SeriesDataset dataset_from_csv(const std::string& text, SeriesKind kind, const std::string& label,
                               const std::string& target_column) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty csv");
    SeriesDataset out;
    out.kind = kind;
    out.label = label;
    out.target_column = target_column;
    {
        std::istringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) out.columns.push_back(cell);
    }
    std::vector<double> cells;
    Eigen::Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream rowstream(line);
        std::string cell;
        std::size_t got = 0;
        while (std::getline(rowstream, cell, ',')) {
            cells.push_back(std::stod(cell));
            ++got;
        }
        if (got != out.columns.size()) throw Error("csv row width differs from header");
        ++rows;
    }
    out.values.resize(rows, static_cast<Eigen::Index>(out.columns.size()));
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < out.values.cols(); ++c)
            out.values(r, c) = cells[static_cast<std::size_t>(r) * out.columns.size() + static_cast<std::size_t>(c)];
    out.column_index(target_column);  // validates presence
    return out;
}

}  // namespace swarm::data
