#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "area2vec/io.hpp"
#include "area2vec/profile.hpp"
#include "oracles.hpp"

using namespace area2vec;

namespace {

constexpr int kTz = 540;

DayNumber day(const char* iso) { return *parse_date(iso); }

Stay stay_at(DayNumber d, double minute_of_day, double duration, std::size_t area) {
    return Stay{38.26, 140.87, from_local(d, minute_of_day, kTz), duration, area};
}

Clustering clustering_of(std::vector<std::size_t> assignments, std::size_t k) {
    Clustering c;
    c.k = k;
    c.assignments = std::move(assignments);
    return c;
}

std::set<std::pair<int, int>> as_set(const std::vector<OccupiedBin>& bins) {
    std::set<std::pair<int, int>> out;
    for (const auto& b : bins) out.insert({b.day_offset, b.bin});
    return out;
}

int count_of(const std::string& hay, const std::string& needle) {
    int n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

// 2023-06-05 (Mon) .. 2023-06-18 (Sun), with the 14th declared a holiday
const DateRange kPeriod{day("2023-06-05"), day("2023-06-18")};
const HolidayCalendar kCal(std::set<DayNumber>{day("2023-06-14")});

}  // namespace

TEST(OccupiedBins, EndpointsIncluded) {
    std::vector<OccupiedBin> want;
    for (int b = 20; b <= 24; ++b) want.push_back({0, b});
    EXPECT_EQ(occupied_bins(600, 120), want);
    EXPECT_EQ(occupied_bins(0, 29), (std::vector<OccupiedBin>{{0, 0}}));
    EXPECT_EQ(occupied_bins(23 * 60 + 50, 30), (std::vector<OccupiedBin>{{0, 47}, {1, 0}}));
    EXPECT_THROW(occupied_bins(0, 0), Error);
}

TEST(OccupiedBins, CountAndMinuteWalk) {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double start = std::floor(rng.uniform(0, 1440)) + (i % 3 == 0 ? rng.uniform() : 0.0);
        const double dur = 1 + std::floor(rng.uniform(0, 3000)) + (i % 5 == 0 ? rng.uniform() : 0.0);
        const auto bins = occupied_bins(start, dur);
        const auto expect = static_cast<std::size_t>(std::floor((start + dur) / 30) - std::floor(start / 30) + 1);
        ASSERT_EQ(bins.size(), expect);
        ASSERT_EQ(as_set(bins), oracle::minute_bins(start, dur)) << start << " " << dur;
    }
}

TEST(BuildProfiles, SingleStay) {
    StaySet stays;
    stays["u"] = {stay_at(day("2023-06-06"), 600, 120, 0)};
    const auto p = build_profiles(stays, clustering_of({0, 1}, 2), kTz, kCal, kPeriod);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].n_areas, 1u);
    EXPECT_EQ(p[0].day_counts.weekdays, 9);
    EXPECT_EQ(p[0].day_counts.weekend_days, 5);
    for (int b = 0; b < kTimeBins; ++b)
        for (int l = 0; l < kDurationBins; ++l) {
            const double want = (b >= 20 && b <= 24 && l == 3) ? 1.0 / 9 : 0.0;
            EXPECT_DOUBLE_EQ(p[0].matrix[0][b][l], want) << b << "," << l;
            EXPECT_EQ(p[0].matrix[1][b][l], 0.0);
        }
    EXPECT_EQ(p[1].total(), 0.0);
}

TEST(BuildProfiles, DayTypeFollowsTheBinsCalendarDay) {
    // Tuesday 13th 23:00 for 3 hours runs into the holiday on the 14th
    StaySet stays;
    stays["u"] = {stay_at(day("2023-06-13"), 23 * 60, 180, 0)};
    const auto p = build_profiles(stays, clustering_of({0}, 1), kTz, kCal, kPeriod);
    EXPECT_DOUBLE_EQ(p[0].mass(DayType::Weekday, 0, 47), 2.0 / 9);
    EXPECT_DOUBLE_EQ(p[0].mass(DayType::Weekend, 0, 47), 5.0 / 5);
}

TEST(BuildProfiles, BinsOutsideThePeriodAreDropped) {
    StaySet stays;
    stays["u"] = {stay_at(day("2023-06-18"), 23 * 60 + 30, 60, 0), stay_at(day("2023-06-04"), 23 * 60 + 30, 60, 0)};
    const auto p = build_profiles(stays, clustering_of({0}, 1), kTz, kCal, kPeriod);
    // 18th: bins 47 (Sunday); 19th dropped. 4th dropped; 5th: bins 0 and 1 (Monday)
    EXPECT_DOUBLE_EQ(p[0].mass(DayType::Weekend, 0, 47), 1.0 / 5);
    EXPECT_DOUBLE_EQ(p[0].mass(DayType::Weekday, 0, 47), 2.0 / 9);
}

TEST(BuildProfiles, MatchesOracleOnRandomStays) {
    Rng rng(44);
    const std::size_t n_areas = 9, k = 3;
    std::vector<std::size_t> assign(n_areas);
    for (auto& a : assign) a = rng.below(k);
    for (std::size_t c = 0; c < k; ++c) assign[c] = c;  // no empty cluster
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assign) ++sizes[a];

    StaySet stays;
    std::vector<oracle::ProfileStay> ref;
    for (int i = 0; i < 1000; ++i) {
        const DayNumber d = kPeriod.first - 1 + static_cast<DayNumber>(rng.below(16));
        const double start = std::floor(rng.uniform(0, 1440));
        const double dur = 1 + std::floor(rng.uniform(0, 1800));
        const std::size_t area = rng.below(n_areas);
        stays["u" + std::to_string(i % 37)].push_back(stay_at(d, start, dur, area));
        ref.push_back({assign[area], d, start, dur});
    }
    const auto got = build_profiles(stays, clustering_of(assign, k), kTz, kCal, kPeriod);
    const auto want = oracle::profiles(ref, sizes, kPeriod, kCal);
    for (std::size_t c = 0; c < k; ++c)
        for (int t = 0; t < 2; ++t)
            for (int b = 0; b < kTimeBins; ++b)
                for (int l = 0; l < kDurationBins; ++l)
                    ASSERT_NEAR(got[c].matrix[t][b][l], want[c][t][b][l], 1e-12) << c << t << " " << b << " " << l;
}

TEST(BuildProfiles, LinearAndOrderInvariant) {
    Rng rng(45);
    StaySet stays, doubled, reversed;
    for (int i = 0; i < 200; ++i) {
        const auto s = stay_at(kPeriod.first + static_cast<DayNumber>(rng.below(14)), std::floor(rng.uniform(0, 1440)),
                               1 + std::floor(rng.uniform(0, 900)), rng.below(4));
        stays["a"].push_back(s);
        doubled["a"].push_back(s);
        doubled["b"].push_back(s);
        reversed["z"].insert(reversed["z"].begin(), s);
    }
    const auto cl = clustering_of({0, 1, 1, 0}, 2);
    const auto one = build_profiles(stays, cl, kTz, kCal, kPeriod);
    const auto two = build_profiles(doubled, cl, kTz, kCal, kPeriod);
    const auto rev = build_profiles(reversed, cl, kTz, kCal, kPeriod);
    for (std::size_t c = 0; c < 2; ++c)
        for (int t = 0; t < 2; ++t)
            for (int b = 0; b < kTimeBins; ++b)
                for (int l = 0; l < kDurationBins; ++l) {
                    EXPECT_NEAR(two[c].matrix[t][b][l], 2 * one[c].matrix[t][b][l], 1e-12);
                    EXPECT_EQ(rev[c].matrix[t][b][l], one[c].matrix[t][b][l]);
                }
}

TEST(BuildProfiles, Errors) {
    StaySet stays;
    stays["u"] = {stay_at(day("2023-06-10"), 600, 60, 0)};
    // a weekend-only period has no weekday to normalize by
    EXPECT_THROW(build_profiles(stays, clustering_of({0}, 1), kTz, kCal, {day("2023-06-10"), day("2023-06-11")}),
                 Error);
    stays["u"][0].area_id = 3;
    EXPECT_THROW(build_profiles(stays, clustering_of({0}, 1), kTz, kCal, kPeriod), Error);
}

TEST(ProfileJson, RoundTrip) {
    ClusterProfile p;
    p.cluster_id = 2;
    p.n_areas = 5;
    p.day_counts = {20, 8};
    p.matrix[1][47][6] = 0.1 + 0.2;
    p.matrix[0][3][0] = 1e-300;
    const auto back = profile_from_json(nlohmann::json::parse(profile_to_json(p).dump()));
    EXPECT_EQ(back.cluster_id, 2u);
    EXPECT_EQ(back.n_areas, 5u);
    EXPECT_EQ(back.day_counts.weekdays, 20);
    EXPECT_EQ(back.matrix, p.matrix);
}

TEST(ProfileSvg, EmptyProfileHasNoBars) {
    ClusterProfile p;
    const auto svg = render_profile_panel_svg(p, DayType::Weekday, 0.0);
    EXPECT_EQ(count_of(svg, "class=\"bar\""), 0);
    EXPECT_EQ(count_of(svg, "class=\"legend\""), kDurationBins);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}

TEST(ProfileSvg, OneEntryOneBar) {
    ClusterProfile p;
    p.matrix[1][10][2] = 0.5;
    EXPECT_EQ(count_of(render_profile_panel_svg(p, DayType::Weekend, 1.0), "class=\"bar\""), 1);
    EXPECT_EQ(count_of(render_profile_panel_svg(p, DayType::Weekday, 1.0), "class=\"bar\""), 0);
}

TEST(ProfileSvg, SharedScale) {
    std::vector<ClusterProfile> ps(2);
    ps[0].matrix[0][5][0] = 0.25;
    ps[0].matrix[0][5][4] = 0.5;
    ps[1].matrix[1][9][1] = 0.6;
    EXPECT_DOUBLE_EQ(shared_y_max(ps), 0.75);
}

TEST(ProfileSvg, MatchesGoldenFile) {
    ClusterProfile p;
    p.cluster_id = 1;
    p.n_areas = 12;
    p.day_counts = {20, 8};
    for (int b = 16; b < 40; ++b) {
        p.matrix[0][b][0] = 0.05;
        p.matrix[0][b][4] = 0.01 * (b - 15);
    }
    p.matrix[0][44][6] = 0.3;
    const std::string svg = render_profile_panel_svg(p, DayType::Weekday, 0.5);
    const std::string path = std::string(A2V_TEST_DATA) + "/profile_panel.svg";
    if (std::getenv("A2V_UPDATE_GOLDEN")) io::write_file(path, svg);
    std::ifstream in(path, std::ios::binary);
    ASSERT_TRUE(in) << "missing " << path << " (rerun with A2V_UPDATE_GOLDEN=1)";
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), svg);
}

TEST(GeoJson, OneClosedSquarePerArea) {
    const Grid g = build_grid(bbox_from_origin(38.26, 140.865, 200, 300), 50);
    StaySet stays;
    for (std::size_t cell : {5u, 6u, 7u, 11u, 23u}) {
        const auto [lat, lon] = g.center(cell);
        for (int i = 0; i < 3; ++i) stays["u"].push_back(Stay{lat, lon, 1e9 + 7200.0 * stays["u"].size(), 30, {}});
    }
    const auto vocab = build_vocabulary(g, stays, 3);
    ASSERT_EQ(vocab.size(), 5u);
    const auto gj = render_geojson(g, vocab, clustering_of({0, 1, 0, 1, 1}, 2));
    ASSERT_EQ(gj.at("features").size(), 5u);
    std::vector<std::array<double, 4>> boxes;  // w s e n
    for (std::size_t a = 0; a < 5; ++a) {
        const auto& f = gj["features"][a];
        EXPECT_EQ(f["properties"]["area_id"], a);
        EXPECT_EQ(f["properties"]["stay_count"], 3);
        const auto& ring = f["geometry"]["coordinates"][0];
        ASSERT_EQ(ring.size(), 5u);
        EXPECT_EQ(ring[0], ring[4]);
        const double w = ring[0][0], s = ring[0][1], e = ring[2][0], n = ring[2][1];
        EXPECT_LT(w, e);
        EXPECT_LT(s, n);
        const double lat = f["properties"]["center_lat"], lon = f["properties"]["center_lon"];
        EXPECT_TRUE(lat > s && lat < n && lon > w && lon < e);
        boxes.push_back({w, s, e, n});
    }
    // cells never overlap; neighbours share an edge exactly
    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            const auto& a = boxes[i];
            const auto& b = boxes[j];
            const bool apart = a[2] <= b[0] || b[2] <= a[0] || a[3] <= b[1] || b[3] <= a[1];
            EXPECT_TRUE(apart) << i << " overlaps " << j;
        }
    EXPECT_EQ(boxes[1][2], boxes[2][0]);  // cells 6 and 7, same row
    EXPECT_EQ(boxes[0][3], boxes[3][1]);  // cells 5 and 11, same column
    EXPECT_THROW(render_geojson(g, vocab, clustering_of({0, 1}, 2)), Error);
}
