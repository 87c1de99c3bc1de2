#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tweetgauge_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string command = std::string(TWEETGAUGE_CLI) + " " + args + " > " + (dir / "stdout.txt").string() +
                              " 2> " + err.string();
  const int status = std::system(command.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

}  // namespace

TEST(Cli, StatsOnHandCountedFixture) {
  const fs::path dir = scratch("stats");
  std::ofstream(dir / "train.csv") << "id,keyword,location,text,target\n"
                                      "1,,,Forest fire near the town,1\n"
                                      "2,,,\"I love fire, and fire loves me\",0\n"
                                      "3,,,Flood warning,1\n";
  const Result r = run("stats " + (dir / "train.csv").string() + " --out " + (dir / "stats").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  // Tokens: [forest fire near town] [love fire fire loves] [flood warning]
  EXPECT_EQ(slurp(dir / "stats" / "stats_counts.csv"),
            "statistic,value\ntotal_tweets,3\ntotal_positive,2\nunique_words,8\nunique_words_min_freq_2,1\n");
  EXPECT_EQ(slurp(dir / "stats" / "stats_lengths.csv"),
            "statistic,value\nmean_length,3.3333\nmedian_length,4\nmax_length,4\nmin_length,2\n");
  EXPECT_EQ(slurp(dir / "stats" / "length_histogram.csv"), "length,positive,negative\n2,1,0\n4,1,1\n");
  EXPECT_EQ(slurp(dir / "stats" / "top_words_negative.csv"), "rank,word,frequency\n1,fire,2\n2,love,1\n3,loves,1\n");
}

TEST(Cli, MissingFileNamesPath) {
  const fs::path dir = scratch("missing");
  const Result r = run("stats " + (dir / "nope.csv").string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find((dir / "nope.csv").string()), std::string::npos);
}

TEST(Cli, UsageErrors) {
  const fs::path dir = scratch("usage");
  EXPECT_EQ(run("", dir).code, 1);
  EXPECT_EQ(run("frobnicate", dir).code, 1);
  EXPECT_EQ(run("train --no-such-flag 1", dir).code, 1);
  EXPECT_EQ(run("train --seed banana", dir).code, 1);
  EXPECT_EQ(run("--help", dir).code, 0);
}

TEST(Cli, TrainIsByteDeterministic) {
  const fs::path dir = scratch("determinism");
  tweetgauge::synthetic::write_corpus(dir / "train.csv", 300, 2, true);
  std::ofstream(dir / "exp.cfg") << "train_csv = " << (dir / "train.csv").string() << "\nmodel = random_forest\n"
                                 << "n_trees = 8\nseed = 13\n";
  for (const char* out : {"a", "b"}) {
    const Result r = run("train --config " + (dir / "exp.cfg").string() + " --out " + (dir / out).string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(dir / "a" / "model.ckpt"), slurp(dir / "b" / "model.ckpt"));
  EXPECT_EQ(slurp(dir / "a" / "metrics.csv"), slurp(dir / "b" / "metrics.csv"));
  EXPECT_NE(slurp(dir / "a" / "model.ckpt").find("random_forest v1"), std::string::npos);

  // Flag wins over the config file.
  ASSERT_EQ(run("train --config " + (dir / "exp.cfg").string() + " --seed 14 --out " + (dir / "c").string(), dir).code, 0);
  EXPECT_NE(slurp(dir / "a" / "model.ckpt"), slurp(dir / "c" / "model.ckpt"));
  EXPECT_NE(slurp(dir / "c" / "config.txt").find("seed = 14"), std::string::npos);
}

TEST(Cli, PairingRejectedBeforeAnyOutput) {
  const fs::path dir = scratch("pairing");
  const Result r = run("train --model bilstm --representation bow --out " + (dir / "out").string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bilstm"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, EvaluatePredictExport) {
  const fs::path dir = scratch("evaluate");
  tweetgauge::synthetic::write_corpus(dir / "train.csv", 250, 3, true);
  tweetgauge::synthetic::write_corpus(dir / "test.csv", 40, 4, false, 20000);
  tweetgauge::synthetic::write_vectors(dir / "vectors.txt", 5, 1);
  const std::string data = (dir / "train.csv").string();
  ASSERT_EQ(run("train --train-csv " + data + " --out " + (dir / "lr").string(), dir).code, 0);
  ASSERT_EQ(run("train --train-csv " + data + " --model softmax --representation static_vectors --vectors " +
                    (dir / "vectors.txt").string() + " --out " + (dir / "sm").string(),
                dir)
                .code,
            0);

  const std::string lr = (dir / "lr" / "model.ckpt").string();
  Result r = run("evaluate " + lr + " " + data + " --split heldout --out " + (dir / "heldout.csv").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string row = slurp(dir / "heldout.csv");
  EXPECT_EQ(row.substr(0, 33), "model,embedding,split,auc,f1,acc\n");
  EXPECT_NE(slurp(dir / "lr" / "metrics.csv").find(row.substr(33)), std::string::npos);

  EXPECT_EQ(run("evaluate " + lr + " " + data + " --representation static_vectors", dir).code, 1);
  EXPECT_EQ(run("evaluate " + lr + " " + data + " --split sideways", dir).code, 1);
  EXPECT_EQ(run("evaluate " + (dir / "none.ckpt").string() + " " + data, dir).code, 2);

  r = run("predict " + lr + " " + (dir / "sm" / "model.ckpt").string() + " --data " + (dir / "test.csv").string() +
              " --out " + (dir / "pred.csv").string(),
          dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string pred = slurp(dir / "pred.csv");
  EXPECT_EQ(pred.substr(0, pred.find('\n')),
            "id,text,logistic_regression_bow_score,logistic_regression_bow_label,softmax_static_vectors_score,"
            "softmax_static_vectors_label");

  r = run("export-submission " + lr + " " + (dir / "test.csv").string() + " --out " + (dir / "sub.csv").string(),
          dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string sub = slurp(dir / "sub.csv");
  EXPECT_EQ(std::count(sub.begin(), sub.end(), '\n'), 41);
  EXPECT_EQ(sub.substr(0, 16), "id,target\n20000,");
}

TEST(Cli, DivergenceExitCode) {
  const fs::path dir = scratch("divergence");
  tweetgauge::synthetic::write_corpus(dir / "train.csv", 50, 1, true);
  const Result r = run("train --train-csv " + (dir / "train.csv").string() + " --learning-rate 1e308 --l2-lambda 1 --out " +
                           (dir / "out").string(),
                       dir);
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, DataDirEnvironment) {
  const fs::path dir = scratch("env");
  tweetgauge::synthetic::write_corpus(dir / "train.csv", 20, 1, true);
  const std::string env = "TWEETGAUGE_DATA_DIR=" + dir.string() + " ";
  const fs::path err = dir / "stderr.txt";
  const std::string command = env + TWEETGAUGE_CLI + " stats --out " + (dir / "stats").string() + " > /dev/null 2> " +
                              err.string();
  const int status = std::system(command.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 0) << slurp(err);
  EXPECT_TRUE(fs::exists(dir / "stats" / "stats_counts.csv"));
}
