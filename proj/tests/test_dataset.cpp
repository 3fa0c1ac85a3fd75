#include <gtest/gtest.h>

#include <random>

#include "deepwsd/dataset.hpp"
#include "oracles.hpp"

using namespace deepwsd;

namespace {

const WeightArchive& seed7() {
    static const WeightArchive archive(make_test_weights(7));
    return archive;
}

using Rows = std::vector<std::vector<std::string>>;

} // namespace

TEST(Csv, ParsesQuotesAndLineEndings) {
    EXPECT_EQ(csv::parse("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\n\n"),
              (Rows{{"a", "b"}, {"x,1", "say \"hi\""}}));
    EXPECT_EQ(csv::parse("\xEF\xBB\xBFh1,h2\nv,"), (Rows{{"h1", "h2"}, {"v", ""}}));
    EXPECT_EQ(csv::parse("\"multi\nline\",z"), (Rows{{"multi\nline", "z"}}));
    EXPECT_THROW(csv::parse("\"open"), FormatError);
}

TEST(Csv, JoinRoundTrips) {
    const std::vector<std::string> fields{"plain", "with,comma", "q\"uote", "", "new\nline"};
    EXPECT_EQ(csv::parse(csv::join(fields) + "\n"), (Rows{fields}));
}

TEST(Manifest, ParsesRowsAndResolvesPaths) {
    const auto m = parse_manifest("ref_path,dist_path,mos\nr.png,d.png, 3.5\n/abs/r.png,d2.png,1e1\n",
                                  "/data");
    ASSERT_EQ(m.rows.size(), 2u);
    EXPECT_EQ(m.rows[0].mos, 3.5);
    EXPECT_EQ(m.rows[1].mos, 10.0);
    EXPECT_EQ(m.rows[0].mos_text, "3.5");
    EXPECT_EQ(m.resolve(m.rows[0].ref_path), std::filesystem::path("/data/r.png"));
    EXPECT_EQ(m.resolve(m.rows[1].ref_path), std::filesystem::path("/abs/r.png"));
    EXPECT_TRUE(parse_manifest("ref_path,dist_path,mos\n", ".").rows.empty());
}

TEST(Manifest, StructuralErrors) {
    EXPECT_THROW(parse_manifest("", "."), FormatError);
    EXPECT_THROW(parse_manifest("ref,dist,mos\n", "."), FormatError);
    EXPECT_THROW(parse_manifest("ref_path,dist_path,mos\na,b\n", "."), FormatError);
    EXPECT_THROW(parse_manifest("ref_path,dist_path,mos\na,b,good\n", "."), FormatError);
    EXPECT_THROW(parse_manifest("ref_path,dist_path,mos\na,b,nan\n", "."), FormatError);
    EXPECT_THROW(read_manifest("/nonexistent/manifest.csv"), IoError);
}

TEST(ScoresCsv, FormatsWithoutErrorColumnWhenAllScored) {
    std::vector<BatchRow> rows(2);
    rows[0].source = {"a.png", "b.png", "4", 4.0};
    rows[0].score = -1.25;
    rows[1].source = {"a,1.png", "c.png", "2.5", 2.5};
    rows[1].score = 0.1;
    EXPECT_EQ(format_scores_csv(rows),
              "ref_path,dist_path,mos,score\na.png,b.png,4,-1.25\n\"a,1.png\",c.png,2.5,0.1\n");
}

TEST(ScoresCsv, ErrorColumnAppendedOnFailure) {
    std::vector<BatchRow> rows(2);
    rows[0].source = {"a.png", "b.png", "4", 4.0};
    rows[0].score = 1.0;
    rows[1].source = {"a.png", "missing.png", "2", 2.0};
    rows[1].error = "cannot open missing.png";
    const auto text = format_scores_csv(rows);
    EXPECT_EQ(text, "ref_path,dist_path,mos,score,error\na.png,b.png,4,1,\n"
                    "a.png,missing.png,2,,cannot open missing.png\n");
    const auto pairs = parse_scores_csv(text);
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].raw_score, 1.0);
    EXPECT_EQ(pairs[0].mos, 4.0);
}

TEST(ScoresCsv, ParseErrors) {
    EXPECT_THROW(parse_scores_csv(""), FormatError);
    EXPECT_THROW(parse_scores_csv("ref_path,dist_path,mos\n"), FormatError);
    EXPECT_THROW(parse_scores_csv("ref_path,dist_path,mos,score\na,b,1,x\n"), FormatError);
    EXPECT_THROW(parse_scores_csv("ref_path,dist_path,mos,score\na,b,1\n"), FormatError);
}

TEST(Evaluate, PerfectMonotoneData) {
    std::vector<ScoredPair> pairs;
    const LogisticParams truth{1.0, 5.0, 0.0, 0.7};
    for (int i = 0; i < 30; ++i) {
        const double d = -3.0 + i * 0.2;
        pairs.push_back({"r", "d", d, truth(d)});
    }
    const auto r = evaluate(pairs);
    EXPECT_NEAR(r.plcc_fitted, 1.0, 1e-9);
    EXPECT_NEAR(r.r_fit, 1.0, 1e-6);
    EXPECT_NEAR(r.srcc, -1.0, 1e-12);
    EXPECT_NEAR(r.krcc, -1.0, 1e-12);
    EXPECT_LT(r.plcc_raw, -0.9);
    EXPECT_EQ(r.n_pairs, 30u);

    const auto j = to_json(r);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items())
        keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"plcc_raw", "plcc_fitted", "srcc", "krcc", "r_fit",
                                              "params", "n_pairs"}));
    EXPECT_EQ(j["params"].size(), 4u);
}

TEST(Evaluate, Errors) {
    std::vector<ScoredPair> few(4, {"r", "d", 1.0, 1.0});
    EXPECT_THROW(evaluate(few), DegenerateDataError);
    std::vector<ScoredPair> flat;
    for (int i = 0; i < 10; ++i)
        flat.push_back({"r", "d", double(i), 3.0});
    EXPECT_THROW(evaluate(flat), DegenerateDataError);
}

TEST(Batch, ScoresInManifestOrderAndRecordsFailures) {
    oracle::TempDir dir("batch");
    write_png(dir / "ref.png", oracle::natural_image(1, 32, 32));
    write_png(dir / "d1.png", oracle::add_gaussian_noise(oracle::natural_image(1, 32, 32), 10, 2));
    write_bmp(dir / "d2.bmp", oracle::add_gaussian_noise(oracle::natural_image(1, 32, 32), 30, 3));
    const auto m = parse_manifest("ref_path,dist_path,mos\n"
                                  "ref.png,d1.png,4\n"
                                  "ref.png,nope.png,3\n"
                                  "ref.png,d2.bmp,2\n",
                                  dir.path());
    MetricConfig cfg;
    const auto serial = run_batch(m, &seed7(), cfg, 1);
    const auto parallel = run_batch(m, &seed7(), cfg, 3);
    ASSERT_EQ(serial.size(), 3u);
    EXPECT_TRUE(serial[0].score.has_value());
    EXPECT_FALSE(serial[1].score.has_value());
    EXPECT_NE(serial[1].error.find("nope.png"), std::string::npos);
    EXPECT_TRUE(serial[2].score.has_value());
    EXPECT_LT(*serial[0].score, *serial[2].score);
    EXPECT_EQ(format_scores_csv(serial), format_scores_csv(parallel));
    EXPECT_EQ(*serial[0].score,
              score_files(dir / "ref.png", dir / "d1.png", &seed7(), cfg).score);
}

TEST(Fixtures, SelfGeneratedFixturesVerify) {
    oracle::TempDir dir("fixtures");
    write_fixtures(dir.path(), oracle::random_tensor(3, 32, 48, 3, 0.0f, 1.0f), seed7());
    const auto rep = verify_fixtures(dir.path(), seed7());
    EXPECT_TRUE(rep.all_passed);
    for (std::size_t s = 1; s < kStageCount; ++s)
        EXPECT_EQ(rep.max_rel_error[s], 0.0) << s;
}

TEST(Fixtures, PerturbedStageFailsAndIsReported) {
    oracle::TempDir dir("fixtures");
    write_fixtures(dir.path(), oracle::random_tensor(3, 32, 32, 4, 0.0f, 1.0f), seed7());
    auto t = read_tensor(fixture_stage_path(dir.path(), 3));
    for (float& v : t.data())
        v *= 1.01f;
    write_tensor(fixture_stage_path(dir.path(), 3), t);
    const auto rep = verify_fixtures(dir.path(), seed7());
    EXPECT_FALSE(rep.all_passed);
    EXPECT_FALSE(rep.passed[3]);
    EXPECT_NEAR(rep.max_rel_error[3], 0.01 / 1.01, 1e-4);
    EXPECT_TRUE(rep.passed[1] && rep.passed[2] && rep.passed[4] && rep.passed[5]);
}

TEST(Fixtures, WrongShapeFails) {
    oracle::TempDir dir("fixtures");
    write_fixtures(dir.path(), oracle::random_tensor(3, 32, 32, 5, 0.0f, 1.0f), seed7());
    write_tensor(fixture_stage_path(dir.path(), 5), Tensor({512, 1, 1}));
    const auto rep = verify_fixtures(dir.path(), seed7());
    EXPECT_FALSE(rep.passed[5]);
    EXPECT_TRUE(std::isinf(rep.max_rel_error[5]));
}

TEST(Fixtures, MissingFilesAreIoErrors) {
    oracle::TempDir dir("fixtures");
    EXPECT_THROW(verify_fixtures(dir.path(), seed7()), IoError);
    EXPECT_THROW(verify_fixtures(dir / "absent", seed7()), IoError);
    write_fixtures(dir.path(), oracle::random_tensor(3, 32, 32, 6, 0.0f, 1.0f), seed7());
    std::filesystem::remove(fixture_stage_path(dir.path(), 2));
    EXPECT_THROW(verify_fixtures(dir.path(), seed7()), IoError);
}

TEST(Fixtures, NormwiseRelativeError) {
    EXPECT_EQ(normwise_relative_error(std::vector<float>{1, 2}, std::vector<float>{1, 2}), 0.0);
    EXPECT_DOUBLE_EQ(normwise_relative_error(std::vector<float>{0, 4.5f}, std::vector<float>{0, 4}),
                     0.125);
    EXPECT_TRUE(std::isinf(normwise_relative_error(std::vector<float>{1}, std::vector<float>{0})));
}
