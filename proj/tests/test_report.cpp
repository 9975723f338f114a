#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "auctionfda/commands.hpp"
#include "auctionfda/error.hpp"
#include "auctionfda/io.hpp"
#include "auctionfda/report.hpp"
#include "support.hpp"

using namespace auctionfda;

namespace {

std::vector<PriceCurve> two_curves(const Grid& grid) {
    std::vector<PriceCurve> out;
    for (int k = 0; k < 2; ++k) {
        ResponseVector r;
        r.lot_id = k ? "b" : "a";
        for (double t : grid.points()) r.values.push_back((k + 1) * t * t);
        auto c = smooth_curve(r, grid, SplineConfig::equally_spaced(4, 3));
        c.lot_id = r.lot_id;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
}

std::vector<std::vector<std::pair<double, double>>> polylines(const std::string& svg) {
    std::vector<std::vector<std::pair<double, double>>> out;
    const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it) {
        std::vector<std::pair<double, double>> pts;
        std::istringstream in((*it)[1].str());
        std::string pair;
        while (in >> pair) {
            const auto comma = pair.find(',');
            pts.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
        }
        out.push_back(std::move(pts));
    }
    return out;
}

}  // namespace

TEST(Metadata, BlockLayout) {
    report::Metadata m;
    m.command = "smooth";
    m.flags = {{"--grid", "100"}, {"--monotone", ""}};
    m.notes = {{"alpha", "0.05"}};
    const auto dir = testing_support::scratch_dir("meta");
    std::ofstream(dir / "x.csv") << "abc";
    m.add_input(dir / "x.csv");
    const auto b = m.block();
    EXPECT_EQ(b.rfind("# auctionfda ", 0), 0u);
    EXPECT_NE(b.find("# command: smooth\n"), std::string::npos);
    EXPECT_NE(b.find("# flags: --grid 100 --monotone\n"), std::string::npos);
    EXPECT_NE(b.find("sha256=ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"), std::string::npos);
    EXPECT_NE(b.find("# alpha: 0.05\n"), std::string::npos);
}

TEST(CurvesCsv, RowsAndReadBack) {
    const Grid grid(10);
    const auto curves = two_curves(grid);
    std::ostringstream out;
    report::write_curves_csv(out, report::Metadata{}, curves);
    const auto lines = data_lines(out.str());
    ASSERT_EQ(lines.size(), 21u);
    EXPECT_EQ(lines[0], "lot_id,t_index,t,value,velocity,acceleration");
    EXPECT_EQ(lines[1].rfind("a,1,0,", 0), 0u);

    const auto dir = testing_support::scratch_dir("curves_csv");
    std::ofstream(dir / "curves.csv") << out.str();
    const auto back = report::read_curves_csv(dir / "curves.csv");
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(back.at("b").values[i], curves[1].values[i]);
        EXPECT_EQ(back.at("b").velocity[i], curves[1].velocity[i]);
        EXPECT_EQ(back.at("a").acceleration[i], curves[0].acceleration[i]);
    }
}

TEST(CoefficientsCsv, OrderAndFlags) {
    RegressionResult r;
    r.kind = ResponseKind::velocity;
    for (const auto& name : covariate_names()) {
        CoefficientCurve c;
        c.covariate = name;
        c.beta = {1.0, -0.5};
        c.se = {0.1, 1.0};
        c.ci_lo = {0.8, -2.5};
        c.ci_hi = {1.2, 1.5};
        c.significant = {true, false};
        r.curves.push_back(c);
    }
    std::ostringstream out;
    report::write_coefficients_csv(out, report::Metadata{}, std::span<const RegressionResult>(&r, 1));
    const auto lines = data_lines(out.str());
    ASSERT_EQ(lines.size(), 19u);
    EXPECT_EQ(lines[0], "covariate,response,t_index,beta,se,ci_lo,ci_hi,significant");
    EXPECT_EQ(lines[1], "intercept,velocity,1,1,0.1,0.8,1.2,true");
    EXPECT_EQ(lines[2], "intercept,velocity,2,-0.5,1,-2.5,1.5,false");
    EXPECT_EQ(lines[3].rfind("log_prev_price_sqin,velocity,1,", 0), 0u);
}

TEST(SensitivityCsv, MinimumFlagAndNotes) {
    SensitivityTable t;
    t.cells = {{4, 0.1, 0.25, ""}, {5, 0.1, std::nullopt, "lot 3: singular, system"}};
    t.best = 0;
    std::ostringstream out;
    report::write_sensitivity_csv(out, report::Metadata{}, t);
    const auto lines = data_lines(out.str());
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "p,lambda,rmse,minimum,notes");
    EXPECT_EQ(lines[1], "4,0.1,0.25,true,");
    EXPECT_EQ(lines[2], "5,0.1,,false,\"lot 3: singular, system\"");
}

TEST(Svg, CurvesHaveOnePolylinePerLot) {
    const Grid grid(30);
    const auto curves = two_curves(grid);
    const auto svg = report::curves_svg(curves, "price & curves");
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("price &amp; curves"), std::string::npos);
    const auto polys = polylines(svg);
    ASSERT_EQ(polys.size(), 2u);
    for (const auto& p : polys) {
        ASSERT_EQ(p.size(), 30u);
        for (std::size_t i = 1; i < p.size(); ++i) {
            EXPECT_GT(p[i].first, p[i - 1].first);
            EXPECT_LE(p[i].second, p[i - 1].second + 1e-9);  // rising curve, SVG y points down
        }
    }
    EXPECT_LT(polys[1].back().second, polys[0].back().second);
}

TEST(Svg, CoefficientPanelHasBandLineAndZero) {
    RegressionResult r;
    for (const auto& name : covariate_names()) {
        CoefficientCurve c;
        c.covariate = name;
        c.beta = {0.5, 0.2, -0.1};
        c.se = {0.1, 0.1, 0.1};
        c.ci_lo = {0.3, 0.0, -0.3};
        c.ci_hi = {0.7, 0.4, 0.1};
        c.significant = {true, false, false};
        r.curves.push_back(c);
    }
    const auto svg = report::coefficient_svg(std::span<const RegressionResult>(&r, 1), 4);
    EXPECT_EQ(polylines(svg).size(), 1u);
    EXPECT_EQ(polylines(svg)[0].size(), 3u);
    EXPECT_NE(svg.find("<polygon"), std::string::npos);
    EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
    EXPECT_NE(svg.find("log_opening_bid"), std::string::npos);
}

TEST(RunConfig, Validation) {
    cli::RunConfig c;
    EXPECT_NO_THROW(cli::validate(c));
    auto bad = c;
    bad.grid = 1;
    EXPECT_THROW(cli::validate(bad), ValidationError);
    bad = c;
    bad.penalty_order = 5;
    EXPECT_THROW(cli::validate(bad), ValidationError);
    bad = c;
    bad.lambda = -1;
    EXPECT_THROW(cli::validate(bad), ValidationError);
    bad = c;
    bad.alpha = 1.0;
    EXPECT_THROW(cli::validate(bad), ValidationError);
    bad = c;
    bad.outlier_sd = 0.0;
    EXPECT_THROW(cli::validate(bad), ValidationError);
    const auto echo = cli::flag_echo(c);
    EXPECT_NE(echo.find("--grid 100"), std::string::npos);
    EXPECT_NE(echo.find("--lambda 0.1"), std::string::npos);
    EXPECT_EQ(echo.find("--out "), std::string::npos);
}
