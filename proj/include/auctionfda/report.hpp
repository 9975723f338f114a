#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "auctionfda/funcreg.hpp"
#include "auctionfda/pipeline.hpp"
#include "auctionfda/pspline.hpp"

namespace auctionfda::report {

/// Leading '#' comment block of every emitted CSV.
struct Metadata {
    std::string command;
    std::vector<std::pair<std::string, std::string>> flags;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
    std::vector<std::pair<std::string, std::string>> notes;

    void add_input(const std::filesystem::path& path);
    std::string block() const;
};

void write_curves_csv(std::ostream& out, const Metadata& meta, std::span<const PriceCurve> curves);

/// Reads lot_id,t_index,t,value,velocity,acceleration rows back into samples.
std::map<std::string, CurveSamples> read_curves_csv(const std::filesystem::path& path);

void write_coefficients_csv(std::ostream& out, const Metadata& meta, std::span<const RegressionResult> results);

void write_sensitivity_csv(std::ostream& out, const Metadata& meta, const SensitivityTable& table);

/// Overlay of all curves (one polyline each) on a unit-square plot.
std::string curves_svg(std::span<const PriceCurve> curves, const std::string& title);

/// One panel per response: shaded band, beta polyline and zero line.
std::string coefficient_svg(std::span<const RegressionResult> results, std::size_t covariate);

}  // namespace auctionfda::report
