#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "clipscale/error.hpp"
#include "clipscale/records.hpp"
#include "clipscale/text.hpp"

using namespace clipscale;

namespace {

const std::string kHeader = "arch,family,pretrain_dataset,samples_seen,task,metric_percent\n";

std::string data_path(const std::string& rel) { return std::string(CLIPSCALE_DATA_DIR) + "/" + rel; }

ExperimentRecord make(std::string arch, std::uint64_t samples, std::string task, double metric,
                      std::string dataset = "LAION-2B") {
    return {std::move(arch), Family::OpenClipLaion, std::move(dataset), samples, std::move(task), metric};
}

}  // namespace

TEST(ParseRecords, SingleRowFromImageNetTable) {
    auto recs = parse_records(kHeader + "ViT-B/32,openclip-laion,LAION-2B,34000000000,imagenet-zeroshot,66.47\n",
                              Format::Csv);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].arch, "ViT-B/32");
    EXPECT_EQ(recs[0].family, Family::OpenClipLaion);
    EXPECT_EQ(recs[0].samples_seen, 34'000'000'000ULL);
    EXPECT_EQ(recs[0].metric_percent, 66.47);
}

TEST(ParseRecords, HeaderOnlyIsEmpty) {
    EXPECT_TRUE(parse_records(kHeader, Format::Csv).empty());
    EXPECT_TRUE(parse_records("[]", Format::Json).empty());
}

TEST(ParseRecords, MetricAbove100IsRangeError) {
    try {
        parse_records(kHeader + "ViT-B/32,openclip-laion,LAION-2B,3000000000,imagenet-zeroshot,101.0\n", Format::Csv);
        FAIL() << "expected RangeError";
    } catch (const RangeError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("metric_percent"), std::string::npos);
    }
}

TEST(ParseRecords, MalformedRowNamesLineAndField) {
    try {
        parse_records(kHeader + "# comment\nViT-B/32,openclip-laion,LAION-2B,lots,imagenet-zeroshot,50\n", Format::Csv);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("samples_seen"), std::string::npos) << msg;
    }
    EXPECT_THROW(parse_records(kHeader + "ViT-B/32,openai,LAION-2B,1,t,50\n", Format::Csv), ParseError);
    EXPECT_THROW(parse_records(kHeader + "ViT-B/32,openclip-laion,LAION-2B,1,t\n", Format::Csv), ParseError);
    EXPECT_THROW(parse_records(kHeader + "ViT-B/32,openclip-laion,LAION-2B,0,t,5\n", Format::Csv), RangeError);
    EXPECT_THROW(parse_records("arch,family\n", Format::Csv), ParseError);
}

TEST(ParseRecords, DuplicateKeyNamesBothRows) {
    std::string text = kHeader + "ViT-B/32,openclip-laion,LAION-2B,3000000000,t,50\n" +
                       "ViT-B/16,openclip-laion,LAION-2B,3000000000,t,51\n" +
                       "ViT-B/32,openclip-laion,LAION-2B,3000000000,t,52\n";
    try {
        parse_records(text, Format::Csv);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    }
}

TEST(ParseRecords, JsonErrorsNameElementAndField) {
    try {
        parse_records(R"([{"arch":"ViT-B/32","family":"clip-wit","pretrain_dataset":"WIT-400M",
                           "samples_seen":13000000000,"task":"t","metric_percent":"high"}])",
                      Format::Json);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("record 0"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("metric_percent"), std::string::npos);
    }
    EXPECT_THROW(parse_records("{", Format::Json), ParseError);
}

// parse(serialize(x)) == x on random record lists, both formats.
TEST(ParseRecords, SerializeRoundTripProperty) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> metric(0.0, 100.0);
    std::uniform_int_distribution<std::uint64_t> samples(1, 100'000'000'000ULL);
    const std::vector<std::string> archs = {"ViT-B/32", "ViT-L/14", "ViT-G/14"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ExperimentRecord> recs;
        int n = trial % 12;
        for (int i = 0; i < n; ++i) {
            ExperimentRecord r = make(archs[static_cast<std::size_t>(i) % 3], samples(rng), "task-" + std::to_string(i),
                                      metric(rng));
            r.family = i % 2 ? Family::ClipWit : Family::OpenClipLaion;
            recs.push_back(r);
        }
        for (auto fmt : {Format::Csv, Format::Json}) EXPECT_EQ(parse_records(serialize_records(recs, fmt), fmt), recs);
    }
}

TEST(ArchRegistry, DefaultMatchesShippedCsv) {
    auto shipped = parse_arch_registry(text::read_file(data_path("archs.csv")));
    auto builtin = default_registry();
    ASSERT_EQ(shipped.size(), builtin.size());
    for (const auto& s : builtin.specs()) {
        const auto& t = shipped.at(s.name);
        EXPECT_EQ(t.gmacs_per_sample, s.gmacs_per_sample);
        EXPECT_EQ(t.params_millions, s.params_millions);
        EXPECT_EQ(t.embed_dim, s.embed_dim);
    }
    EXPECT_EQ(parse_arch_registry(serialize_arch_registry(builtin)).specs().size(), builtin.size());
}

TEST(ArchRegistry, RejectsInvalidEntries) {
    ArchRegistry reg;
    reg.add({"A", 1, 1, 1, 1, 1, 1.0, 1.0});
    EXPECT_THROW(reg.add({"A", 1, 1, 1, 1, 1, 1.0, 1.0}), ParseError);
    EXPECT_THROW(reg.add({"B", 1, 1, 1, 1, 1, 1.0, 0.0}), RangeError);
    EXPECT_THROW(reg.at("C"), LookupError);
}

TEST(TotalCompute, ArchitectureTableProducts) {
    auto reg = default_registry();
    EXPECT_DOUBLE_EQ(total_compute(make("ViT-B/32", 34'000'000'000ULL, "t", 1), reg), 2.516e11);
    EXPECT_DOUBLE_EQ(total_compute(make("ViT-H/14", 34'000'000'000ULL, "t", 1), reg), 6.49298e12);
    for (const auto& s : reg.specs()) EXPECT_EQ(total_compute(make(s.name, 1, "t", 1), reg), s.gmacs_per_sample);
    EXPECT_THROW(total_compute(make("ViT-X/99", 1, "t", 1), reg), LookupError);
}

TEST(TotalCompute, LinearInSamples) {
    auto reg = default_registry();
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint64_t> s(1, 50'000'000'000ULL);
    for (const auto& a : reg.specs())
        for (int i = 0; i < 20; ++i) {
            auto n = s(rng);
            EXPECT_EQ(total_compute(make(a.name, 2 * n, "t", 1), reg), 2 * total_compute(make(a.name, n, "t", 1), reg));
        }
}

TEST(AggregateMean, Basics) {
    std::vector<ExperimentRecord> recs = {make("A", 1, "x", 0.0), make("A", 1, "y", 100.0)};
    std::vector<std::string> both = {"x", "y"}, one = {"y"}, missing = {"x", "z"};
    EXPECT_EQ(aggregate_mean(recs, both), 50.0);
    EXPECT_EQ(aggregate_mean(recs, one), 100.0);
    try {
        aggregate_mean(recs, missing);
        FAIL();
    } catch (const LookupError& e) {
        EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
    }
}

TEST(AggregateMean, RobustnessAndVtabFromTables) {
    auto all = parse_records(text::read_file(data_path("records/vtab_plus_laion2b.csv")), Format::Csv);
    auto for_arch = [&](const std::string& arch) {
        std::vector<ExperimentRecord> out;
        std::copy_if(all.begin(), all.end(), std::back_inserter(out), [&](const auto& r) { return r.arch == arch; });
        return out;
    };
    std::vector<std::string> robustness = {"vtab/inet-v2", "vtab/inet-r", "vtab/inet-s", "vtab/objnet", "vtab/inet-a"};
    EXPECT_NEAR(aggregate_mean(for_arch("ViT-H/14"), robustness), 71.13, 0.005);

    std::vector<std::string> vtab;
    for (const auto& r : for_arch("ViT-H/14")) vtab.push_back(r.task);
    ASSERT_EQ(vtab.size(), 35u);
    const std::vector<std::pair<std::string, double>> reported = {
        {"ViT-B/32", 50.69}, {"ViT-B/16", 52.60}, {"ViT-L/14", 54.63}, {"ViT-g/14", 56.54}, {"ViT-H/14", 56.43}};
    for (const auto& [arch, avg] : reported) EXPECT_NEAR(aggregate_mean(for_arch(arch), vtab), avg, 0.005) << arch;
}

TEST(AggregateMean, PermutationInvariant) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> m(0, 100);
    std::vector<ExperimentRecord> recs;
    std::vector<std::string> tasks;
    for (int i = 0; i < 9; ++i) {
        tasks.push_back("t" + std::to_string(i));
        recs.push_back(make("A", 1, tasks.back(), m(rng)));
    }
    double ref = aggregate_mean(recs, tasks);
    for (int k = 0; k < 20; ++k) {
        std::shuffle(recs.begin(), recs.end(), rng);
        EXPECT_NEAR(aggregate_mean(recs, tasks), ref, 1e-12);
    }
}

TEST(ToPoints, ComplementConventionAndOrder) {
    auto reg = default_registry();
    std::vector<ExperimentRecord> recs = {
        make("ViT-B/32", 34'000'000'000ULL, "imagenet-zeroshot", 66.47),
        make("ViT-B/32", 34'000'000'000ULL, "mscoco-image-r5", 65.05),
        make("ViT-L/14", 3'000'000'000ULL, "imagenet-zeroshot", 100.0),
    };
    auto pts = to_points(recs, "imagenet-zeroshot", Family::OpenClipLaion, reg);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_DOUBLE_EQ(pts[0].compute_gmac, 2.516e11);
    EXPECT_NEAR(pts[0].error_percent, 33.53, 1e-12);
    EXPECT_EQ(pts[0].source_record, 0u);
    EXPECT_EQ(pts[1].error_percent, 0.0);
    EXPECT_EQ(pts[1].source_record, 2u);
    EXPECT_TRUE(to_points(recs, "imagenet-zeroshot", Family::ClipWit, reg).empty());
    EXPECT_TRUE(to_points(recs, "nothing", Family::OpenClipLaion, reg).empty());
}

TEST(ToPoints, MetricReconstructionIsIdentity) {
    auto reg = default_registry();
    auto recs = load_records(std::vector<std::string>{data_path("records/openclip_laion.csv")});
    auto pts = to_points(recs, "mscoco-image-r5", Family::OpenClipLaion, reg);
    ASSERT_EQ(pts.size(), 29u);
    for (const auto& p : pts) EXPECT_NEAR(100.0 - p.error_percent, recs[p.source_record].metric_percent, 1e-12);
}

TEST(LoadRecords, FixturesLoadTogetherWithoutKeyCollisions) {
    std::vector<std::string> paths = {data_path("records/openclip_laion.csv"), data_path("records/clip_wit.csv"),
                                      data_path("records/vtab_plus_laion2b.csv")};
    auto recs = load_records(paths);
    EXPECT_EQ(recs.size(), 174u + 3u + 175u);
    std::vector<std::string> twice = {paths[1], paths[1]};
    EXPECT_THROW(load_records(twice), ParseError);
}
