#include <gtest/gtest.h>

#include <map>
#include <set>

#include "area2vec/encoding.hpp"
#include "oracles.hpp"

using namespace area2vec;

namespace {

const HolidayCalendar kNoHolidays;

// Local wall-clock time on a given date, JST.
Stay local_stay(const char* date, int hh, int mm, double duration_min) {
    return Stay{35, 135, from_local(*parse_date(date), hh * 60 + mm, 540), duration_min, std::nullopt};
}

StayCategory cat(DayType d, std::optional<int> a, int dur) { return StayCategory{d, a, dur}; }

}  // namespace

TEST(ClassifyStay, Examples) {
    // 2023-06-06 is a Tuesday, 2023-06-11 a Sunday, 2023-06-07 a Wednesday
    EXPECT_EQ(classify_stay(local_stay("2023-06-06", 10, 30, 45), 540, kNoHolidays), cat(DayType::Weekday, 5, 1));
    EXPECT_EQ(classify_stay(local_stay("2023-06-11", 23, 59, 29.9), 540, kNoHolidays), cat(DayType::Weekend, 11, 0));
    EXPECT_EQ(classify_stay(local_stay("2023-06-07", 8, 0, 720), 540, kNoHolidays).duration_bin, 6);
    EXPECT_EQ(classify_stay(local_stay("2023-06-07", 8, 0, 720), 540, kNoHolidays), cat(DayType::Weekday, std::nullopt, 6));
}

TEST(ClassifyStay, DurationEdgesAreHalfOpen) {
    const double edges[] = {0, 30, 60, 120, 240, 360, 720};
    for (int b = 0; b < 7; ++b) {
        if (b > 0) {
            EXPECT_EQ(duration_bin(edges[b] - 1e-9), b - 1);
        }
        EXPECT_EQ(duration_bin(edges[b] + (b == 0 ? 1e-9 : 0.0)), b);
    }
    EXPECT_EQ(duration_bin(240), 4);
    EXPECT_EQ(duration_bin(1e6), 6);
}

TEST(ClassifyStay, HolidayIsWeekend) {
    const auto jp = HolidayCalendar::japan();
    EXPECT_EQ(classify_stay(local_stay("2020-04-29", 12, 0, 60), 540, jp).day_type, DayType::Weekend);
    EXPECT_EQ(classify_stay(local_stay("2020-04-29", 12, 0, 60), 540, kNoHolidays).day_type, DayType::Weekday);
}

TEST(ClassifyStay, UsesLocalCalendarDay) {
    // 2023-06-09 Friday 23:30 JST is 14:30 UTC Friday; 2023-06-10 00:30 JST is Saturday
    EXPECT_EQ(classify_stay(local_stay("2023-06-09", 23, 30, 60), 540, kNoHolidays).day_type, DayType::Weekday);
    EXPECT_EQ(classify_stay(local_stay("2023-06-10", 0, 30, 60), 540, kNoHolidays).day_type, DayType::Weekend);
}

TEST(Encode, CanonicalIds) {
    EXPECT_EQ(encode(cat(DayType::Weekday, 0, 0)), 0);
    EXPECT_EQ(encode(cat(DayType::Weekend, std::nullopt, 6)), 145);
    EXPECT_EQ(encode(cat(DayType::Weekday, std::nullopt, 6)), 144);
    EXPECT_EQ(encode(cat(DayType::Weekend, 11, 5)), 143);
    EXPECT_EQ(encode(cat(DayType::Weekday, 5, 1)), 31);
}

TEST(Encode, RejectsInconsistentTriples) {
    EXPECT_THROW(encode(cat(DayType::Weekday, 3, 6)), Error);
    EXPECT_THROW(encode(cat(DayType::Weekday, std::nullopt, 2)), Error);
    EXPECT_THROW(encode(cat(DayType::Weekday, 12, 2)), Error);
    EXPECT_THROW(encode(cat(DayType::Weekday, 0, 7)), Error);
    EXPECT_THROW(decode(-1), Error);
    EXPECT_THROW(decode(146), Error);
}

TEST(Encode, ExhaustiveEnumerationAndRoundTrip) {
    std::set<int> ids;
    for (auto [day, arr, dur] : oracle::category_triples()) {
        const StayCategory c =
            cat(static_cast<DayType>(day), arr < 0 ? std::nullopt : std::optional<int>(arr), dur);
        const int id = encode(c);
        EXPECT_EQ(decode(id), c);
        ids.insert(id);
    }
    EXPECT_EQ(ids.size(), 146u);
    EXPECT_EQ(*ids.begin(), 0);
    EXPECT_EQ(*ids.rbegin(), 145);
    for (int id = 0; id < kNumCategories; ++id) EXPECT_EQ(encode(decode(id)), id);
    EXPECT_EQ(decode(0), cat(DayType::Weekday, 0, 0));
    EXPECT_EQ(decode(144), cat(DayType::Weekday, std::nullopt, 6));
}

TEST(Encode, LongStaysIgnoreArrival) {
    Rng rng(21);
    for (int i = 0; i < 5000; ++i) {
        const Stay s{35, 135, rng.uniform(1.5e9, 1.7e9), rng.uniform(720, 5000), std::nullopt};
        const int id = encode(classify_stay(s, 540, kNoHolidays));
        EXPECT_TRUE(id == 144 || id == 145);
    }
}

TEST(Encode, HistogramIgnoresOrder) {
    Rng rng(22);
    std::vector<Stay> stays;
    for (int i = 0; i < 2000; ++i) stays.push_back({35, 135, rng.uniform(1.5e9, 1.7e9), rng.uniform(1, 2000), std::nullopt});
    auto histogram = [](const std::vector<Stay>& v) {
        std::map<int, int> h;
        for (const auto& s : v) ++h[encode(classify_stay(s, 540, kNoHolidays))];
        return h;
    };
    const auto before = histogram(stays);
    shuffle(stays, rng);
    EXPECT_EQ(histogram(stays), before);
}

TEST(DumpCategories, Table) {
    const auto t = dump_categories();
    EXPECT_EQ(t.substr(0, t.find('\n')), "id,day_type,arrival_bin,duration_bin");
    EXPECT_NE(t.find("\n145,weekend,,6\n"), std::string::npos);
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 147);
}
