#include <gtest/gtest.h>

#include "support.hpp"

using namespace dacp;
using dacp::testing::random_corpus;

namespace {

const char* kTwoTurn =
    R"({"id":"c1","org_id":"o1","language":"en","duration_s":130.0,)"
    R"("turns":[{"speaker":"A","start_ms":0,"text":"hi"},{"speaker":"B","start_ms":5000,"text":"hello"}]})";

ErrorKind kind_of(std::string_view line) {
  try {
    parse_transcript(line);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error for " << line;
  return ErrorKind::stage_failure;
}

/// Strips the optional "[mm:ss] " prefix and the "<tag>: " lead from every
/// non-blank rendered line.
std::vector<std::string> extract_texts(const std::string& rendered) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= rendered.size()) {
    std::size_t nl = rendered.find('\n', pos);
    if (nl == std::string::npos) nl = rendered.size();
    std::string line = rendered.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    if (line.size() > 8 && line[0] == '[' && line[3] == ':' && line[6] == ']' && line[7] == ' ') line = line.substr(8);
    const auto colon = line.find(": ");
    out.push_back(colon == std::string::npos ? std::string() : line.substr(colon + 2));
  }
  return out;
}

}  // namespace

TEST(ParseTranscript, TwoTurnRecord) {
  const auto t = parse_transcript(kTwoTurn);
  EXPECT_EQ(t.id, "c1");
  EXPECT_EQ(t.distinct_speaker_count(), 2u);
  EXPECT_DOUBLE_EQ(t.duration_s, 130.0);
  ASSERT_EQ(t.turns.size(), 2u);
  EXPECT_EQ(t.turns[1], (Turn{"B", 5000, "hello"}));
}

TEST(ParseTranscript, TypedErrors) {
  EXPECT_EQ(kind_of(R"({"id":"x",)"), ErrorKind::malformed_record);
  EXPECT_EQ(kind_of("[1,2]"), ErrorKind::schema_violation);
  EXPECT_EQ(kind_of(R"({"id":"x","org_id":"o","language":"en","turns":[]})"), ErrorKind::schema_violation);
  EXPECT_EQ(kind_of(R"({"id":"x","org_id":"o","language":"en","duration_s":-1,)"
                    R"("turns":[{"speaker":"A","start_ms":0,"text":"a"}]})"),
            ErrorKind::schema_violation);
  // Out of time order.
  EXPECT_EQ(kind_of(R"({"id":"x","org_id":"o","language":"en","duration_s":10,)"
                    R"("turns":[{"speaker":"A","start_ms":500,"text":"a"},{"speaker":"B","start_ms":100,"text":"b"}]})"),
            ErrorKind::schema_violation);
  // Duration shorter than the last turn start.
  EXPECT_EQ(kind_of(R"({"id":"x","org_id":"o","language":"en","duration_s":1,)"
                    R"("turns":[{"speaker":"A","start_ms":5000,"text":"a"}]})"),
            ErrorKind::schema_violation);
  EXPECT_EQ(kind_of(R"({"id":"x","org_id":"o","language":"en","duration_s":10,)"
                    R"("turns":[{"speaker":"A","start_ms":1.5,"text":"a"}]})"),
            ErrorKind::schema_violation);
  EXPECT_EQ(kind_of("{\"id\":\"\xff\"}"), ErrorKind::encoding_error);
}

TEST(ParseTranscript, EmptyTurnTextIsKeptAndFlagged) {
  const auto t = parse_transcript(R"({"id":"x","org_id":"o","language":"en","duration_s":10,)"
                                  R"("turns":[{"speaker":"A","start_ms":0,"text":""}]})");
  EXPECT_TRUE(t.is_degenerate());
}

TEST(ParseTranscript, RoundTripTenThousandRecords) {
  const auto corpus = random_corpus(10'000, 7);
  for (const auto& t : corpus) {
    const std::string first = serialize(t);
    const Transcript back = parse_transcript(first);
    ASSERT_EQ(back, t) << first;
    ASSERT_EQ(serialize(back), first);
  }
}

TEST(ParseTranscript, NonAsciiTextRoundTrips) {
  Transcript t{"u1", "o", "en", 10.0, {Turn{"A", 0, "caf\xc3\xa9 \xe2\x82\xac 5"}}};
  EXPECT_EQ(parse_transcript(serialize(t)), t);
}

TEST(Document, RoundTrip) {
  Document d{"d1", "replay", "some text\nwith lines", 4};
  bool has_count = false;
  EXPECT_EQ(parse_document(serialize(d), &has_count), d);
  EXPECT_TRUE(has_count);
}

TEST(RenderText, SpeakerIndex) {
  const auto t = parse_transcript(kTwoTurn);
  EXPECT_EQ(render_text(t, RenderStyle{}), "Speaker 1: hi\nSpeaker 2: hello");
}

TEST(RenderText, Timestamps) {
  const auto t = parse_transcript(kTwoTurn);
  RenderStyle s;
  s.timestamps = true;
  EXPECT_EQ(render_text(t, s), "[00:00] Speaker 1: hi\n[00:05] Speaker 2: hello");
  EXPECT_EQ(format_timestamp(75'000), "[01:15]");
  EXPECT_EQ(format_timestamp(3'725'000), "[62:05]");
}

TEST(RenderText, BlankLinesAndRoles) {
  const auto t = parse_transcript(kTwoTurn);
  RenderStyle s;
  s.tag_style = TagStyle::role;
  s.blank_lines_between_turns = 2;
  EXPECT_EQ(render_text(t, s), "Agent: hi\n\n\nCustomer: hello");
}

TEST(RenderText, NameTagsFallBackWithoutNames) {
  const auto t = parse_transcript(kTwoTurn);
  RenderStyle s;
  s.tag_style = TagStyle::name;
  EXPECT_EQ(render_text(t, s), "Speaker 1: hi\nSpeaker 2: hello");
  SpeakerLabels labels;
  labels.names = {{"A", "Jordan Lee"}, {"B", "Sam Park"}};
  EXPECT_EQ(render_text(t, s, labels), "Jordan Lee: hi\nSam Park: hello");
  s.tag_style = TagStyle::initials;
  EXPECT_EQ(render_text(t, s, labels), "JL: hi\nSP: hello");
}

TEST(RenderText, InverseExtractionRecoversTurnTexts) {
  const auto corpus = random_corpus(1'000, 11);
  std::mt19937_64 rng(3);
  for (const auto& t : corpus) {
    RenderStyle s;
    s.tag_style = static_cast<TagStyle>(rng() % 4);
    s.timestamps = rng() & 1;
    s.blank_lines_between_turns = static_cast<int>(rng() % 3);
    s.merge_consecutive = rng() & 1;
    const auto source = s.merge_consecutive ? merge_turns(t) : t;
    std::vector<std::string> expected;
    for (const auto& turn : source.turns) expected.push_back(turn.text);
    ASSERT_EQ(extract_texts(render_text(t, s)), expected);
  }
}

TEST(RenderText, PreservesTokenMultiset) {
  const auto corpus = random_corpus(200, 12);
  const auto tok = Tokenizer::word();
  for (const auto& t : corpus) {
    std::vector<std::string> expected;
    for (const auto& turn : t.turns) {
      auto toks = tok.tokenize(turn.text);
      expected.insert(expected.end(), toks.begin(), toks.end());
    }
    std::sort(expected.begin(), expected.end());
    std::vector<std::string> got;
    for (const auto& text : extract_texts(render_text(t, RenderStyle{}))) {
      auto toks = tok.tokenize(text);
      got.insert(got.end(), toks.begin(), toks.end());
    }
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, expected);
  }
}
