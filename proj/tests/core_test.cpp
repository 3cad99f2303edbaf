#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <regex>

#include "test_util.hpp"
#include "vrts/dataset.hpp"
#include "vrts/error.hpp"
#include "vrts/frames.hpp"
#include "vrts/response.hpp"
#include "vrts/seed.hpp"
#include "vrts/trace_io.hpp"

namespace vrts {
namespace {

using testing::make_sample;
using testing::TempDir;

TEST(ParseResponse, CanonicalWellFormed) {
  const auto p = parse_response("<think>frames show a key</think><answer>B</answer>");
  EXPECT_TRUE(p.well_formed_format);
  EXPECT_EQ(p.think, "frames show a key");
  EXPECT_EQ(p.answer, 'B');
}

TEST(ParseResponse, NoTags) {
  const auto p = parse_response("The answer is B.");
  EXPECT_FALSE(p.well_formed_format);
  EXPECT_FALSE(p.answer.has_value());
  EXPECT_EQ(p.raw, "The answer is B.");
}

TEST(ParseResponse, LowercaseLetterWithPunctuation) {
  const auto p = parse_response("<think>…</think><answer> b )</answer>");
  EXPECT_TRUE(p.well_formed_format);
  EXPECT_EQ(p.answer, 'B');
}

TEST(ParseResponse, SurroundingWhitespaceTolerated) {
  const auto p = parse_response("  \n<think>x</think>\n <answer>C</answer>\n");
  EXPECT_TRUE(p.well_formed_format);
  EXPECT_EQ(p.answer, 'C');
}

TEST(ParseResponse, FormatViolations) {
  for (const char* raw : {
           "<answer>A</answer>",                                      // no think block
           "<think>a</think><think>b</think><answer>A</answer>",      // two think blocks
           "<answer>A</answer><think>a</think>",                      // wrong order
           "<think>a</think><answer>A</answer><answer>B</answer>",    // two answers
           "<think>a</think>text<answer>A</answer>",                  // junk between
           "<THINK>a</THINK><ANSWER>A</ANSWER>",                      // tags are case-sensitive
           "<think>a</think><answer>A",                               // truncated
       }) {
    EXPECT_FALSE(parse_response(raw).well_formed_format) << raw;
  }
}

TEST(ParseResponse, AnswerSurvivesBrokenFormat) {
  EXPECT_EQ(parse_response("<answer>A</answer>").answer, 'A');
  EXPECT_FALSE(parse_response("<think>a</think><answer>A").answer.has_value());
}

TEST(ParseAnswer, AgreesWithFullParse) {
  for (const char* raw :
       {"<think>a</think><answer>B</answer>", "<answer> c. </answer>", "<answer>B",
        "<think>x</think><answer>A</answer><answer>B</answer>", "", "no tags", "<answer>AB</answer>",
        "<answer>Z</answer>", "</answer><answer>D</answer>"}) {
    EXPECT_EQ(parse_answer(raw, 4), parse_response(raw, 4).answer) << raw;
  }
}

TEST(ParseResponse, RespectsOptionCount) {
  EXPECT_FALSE(parse_response("<think>x</think><answer>E</answer>", 4).answer.has_value());
  EXPECT_EQ(parse_response("<think>x</think><answer>E</answer>", 5).answer, 'E');
}

TEST(ParseResponse, RenderRoundTrip) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "abc xyz.,;!?0123456789-";
  for (int trial = 0; trial < 500; ++trial) {
    std::string think;
    const int len = static_cast<int>(rng() % 40);
    for (int i = 0; i < len; ++i) think += alphabet[rng() % alphabet.size()];
    // Surrounding whitespace is not part of the think text.
    while (!think.empty() && think.back() == ' ') think.pop_back();
    while (!think.empty() && think.front() == ' ') think.erase(think.begin());
    const Letter letter = letter_at(static_cast<int>(rng() % 26));
    const auto p = parse_response(render_response(think, letter));
    ASSERT_TRUE(p.well_formed_format) << think;
    EXPECT_EQ(p.think, think);
    EXPECT_EQ(p.answer, letter);
  }
}

TEST(ExtractAnswer, Examples) {
  EXPECT_EQ(extract_answer("C", 4), 'C');
  EXPECT_EQ(extract_answer("(d)", 4), 'D');
  EXPECT_FALSE(extract_answer("A and B", 4).has_value());
}

TEST(ExtractAnswer, Rejections) {
  EXPECT_FALSE(extract_answer("", 4).has_value());
  EXPECT_FALSE(extract_answer("  .  ", 4).has_value());
  EXPECT_FALSE(extract_answer("E", 4).has_value());
  EXPECT_FALSE(extract_answer("1", 4).has_value());
  EXPECT_FALSE(extract_answer("AB", 4).has_value());
  EXPECT_EQ(extract_answer(" [a]. ", 2), 'A');
}

TEST(FrameIndices, Examples) {
  EXPECT_EQ(frame_indices(128, 4), (std::vector<int>{0, 32, 64, 96}));
  EXPECT_EQ(frame_indices(10, 10), (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(frame_indices(3, 8), (std::vector<int>{0, 1, 2}));
}

TEST(FrameIndices, FirstNSwitch) {
  EXPECT_EQ(frame_indices(128, 4, FrameSelection::kFirstN), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(parse_frame_selection("first-n"), FrameSelection::kFirstN);
  EXPECT_EQ(parse_frame_selection("uniform"), FrameSelection::kUniform);
  EXPECT_THROW(parse_frame_selection("random"), InvalidArgument);
}

TEST(FrameIndices, StrictlyIncreasingInRange) {
  for (int total = 1; total <= 200; total += 7) {
    for (int n = 1; n <= 300; n += 11) {
      const auto idx = frame_indices(total, n);
      ASSERT_EQ(static_cast<int>(idx.size()), std::min(n, total));
      for (std::size_t k = 0; k < idx.size(); ++k) {
        ASSERT_GE(idx[k], 0);
        ASSERT_LT(idx[k], total);
        if (k > 0) ASSERT_LT(idx[k - 1], idx[k]);
      }
    }
  }
}

TEST(FrameIndices, DoublingNestsWhenBudgetDividesTotal) {
  for (int total : {64, 128, 256, 384}) {
    for (int n = 1; 2 * n <= total; n *= 2) {
      if (total % (2 * n) != 0) continue;
      const auto sparse = frame_indices(total, n);
      const auto dense = frame_indices(total, 2 * n);
      EXPECT_TRUE(std::includes(dense.begin(), dense.end(), sparse.begin(), sparse.end()))
          << total << " " << n;
    }
  }
}

TEST(FrameIndices, SameBudgetSameFrames) {
  EXPECT_EQ(frame_indices(97, 32), frame_indices(97, 32));
}

TEST(Seed, DeriveIsStableAndKeyed) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(derive_seed(1, "x", 2, 3), derive_seed(1, "x", 2, 3));
  EXPECT_NE(derive_seed(1, "x", 2, 3), derive_seed(1, "x", 3, 2));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
}

TEST(Types, SampleValidation) {
  auto s = make_sample("q", 4, 'B');
  EXPECT_NO_THROW(validate(s));
  s.gt_answer = 'E';
  EXPECT_THROW(validate(s), InvalidArgument);
  s = make_sample("q", 1);
  EXPECT_THROW(validate(s), InvalidArgument);
  s = make_sample("q", 4);
  s.options[2].letter = 'D';
  EXPECT_THROW(validate(s), InvalidArgument);
}

TEST(Types, ExternalFrameUri) {
  ExternalVideo v{"file:///v.mp4", 300, "file:///frames/{}.jpg"};
  EXPECT_EQ(v.frame_uri(7), "file:///frames/7.jpg");
  v.frame_uri_template.clear();
  EXPECT_EQ(v.frame_uri(7), "file:///v.mp4#frame=7");
}

std::vector<McqaSample> sample_list() {
  auto a = make_sample("a", 4, 'C');
  auto& video = std::get<SyntheticVideo>(a.video);
  video.frame_evidence[3] = 'C';
  video.frame_evidence[90] = 'A';
  video.evidence_window = SyntheticVideo::Window{80, 16};
  a.difficulty = "hard";
  McqaSample b = make_sample("b", 2, 'B');
  b.video = ExternalVideo{"https://example.org/v.mp4", 240, ""};
  b.question = "What \"quoted\" thing\nis shown?";
  return {a, b};
}

TEST(Dataset, RoundTrip) {
  TempDir dir;
  const auto samples = sample_list();
  save_dataset(samples, dir / "d.jsonl");
  EXPECT_EQ(load_dataset(dir / "d.jsonl"), samples);
}

TEST(Dataset, ByteStable) {
  const auto samples = sample_list();
  const std::string text = serialize_dataset(samples);
  EXPECT_EQ(serialize_dataset(parse_dataset(text)), text);
}

TEST(Dataset, MissingFieldNamesLineAndField) {
  auto lines = serialize_dataset(sample_list());
  const auto second = lines.find('\n') + 1;
  std::string broken = lines.substr(0, second) +
                       std::regex_replace(lines.substr(second), std::regex(R"("gt_answer":"B",)"),
                                          "");
  try {
    parse_dataset(broken);
    FAIL() << "expected a FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "gt_answer");
  }
}

TEST(Dataset, DuplicateIdIsAnError) {
  const auto s = make_sample("dup");
  const std::string text = dataset_line(s) + "\n" + dataset_line(s) + "\n";
  try {
    parse_dataset(text);
    FAIL() << "expected a FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("dup"), std::string::npos);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Dataset, InvalidJsonAndBadValues) {
  EXPECT_THROW(parse_dataset("{not json}\n"), FormatError);
  auto s = make_sample("x", 4, 'A');
  std::string line = dataset_line(s);
  line = std::regex_replace(line, std::regex(R"("gt_answer":"A")"), R"("gt_answer":"Q")");
  EXPECT_THROW(parse_dataset(line), FormatError);
}

TEST(Dataset, BlankLinesAndCrlfTolerated) {
  const auto samples = sample_list();
  std::string text;
  for (const auto& s : samples) text += dataset_line(s) + "\r\n\r\n";
  EXPECT_EQ(parse_dataset(text), samples);
}

TEST(TraceIo, AtomicWriteReplacesFile) {
  TempDir dir;
  write_file_atomic(dir / "sub/out.txt", "one");
  write_file_atomic(dir / "sub/out.txt", "two");
  EXPECT_EQ(read_file(dir / "sub/out.txt"), "two");
  EXPECT_FALSE(std::filesystem::exists(dir / "sub/out.txt.tmp"));
}

}  // namespace
}  // namespace vrts
