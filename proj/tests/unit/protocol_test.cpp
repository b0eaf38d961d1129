#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "arstage/protocol/codec.hpp"
#include "arstage/protocol/schema.hpp"
#include "support/message_gen.hpp"
#include "support/schema_check.hpp"

namespace arstage::protocol {
// Readable failure output: print messages as their wire form.
void PrintTo(const Message& m, std::ostream* os) {
  try {
    *os << encode(m);
  } catch (const std::exception& e) {
    *os << "<unencodable: " << e.what() << ">";
  }
}
void PrintTo(const ContentSnapshot& s, std::ostream* os) { PrintTo(Message{1, s}, os); }
}  // namespace arstage::protocol

namespace {

using namespace arstage;
using namespace arstage::protocol;

const std::filesystem::path kGolden = std::filesystem::path(ARSTAGE_FIXTURE_DIR) / "protocol";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

viewsim::DeviceProfile pixel() { return viewsim::profile_preset("pixel-3"); }

content::ContentItem sign() {
  content::ContentItem it;
  it.id = "welcome-sign";
  it.kind = content::ContentKind::ImageQuad;
  it.geo = {41.8782, -87.6298, 2.0};
  it.orientation = geo::heading_to_orientation(90);
  it.scale = {2, 1, 0.05};
  it.asset_ref = "img/welcome.png";
  it.metadata = {{"riddle", "Find the bridge"}};
  return it;
}

// One hand-written, fully populated message per variant.
std::vector<Message> golden_messages() {
  const geo::LocalPose pose{{1.5, 1.6, -2.25}, geo::heading_to_orientation(45)};
  tracking::FusedPose fused{pose, 4.5, tracking::TrackingMode::SensorBased, 1.0, 1200};
  Telemetry telemetry{"user-1", 59.5, 30, tracking::TrackingMode::SensorBased, 4.5, 87};
  UserView view{"user-1", pixel(), fused, pose, AvatarMode::FiveDof, telemetry,
                {66, 0.5, viewsim::kNearPlaneM, viewsim::kFarPlaneM},
                viewsim::DivergenceReport{25.0, 0.5, viewsim::Verdict::RotationalMismatch},
                {{"welcome-sign", 5.0, 22.619864948040426, {0.25, 0.4, 0.75, 0.6}}},
                {{viewsim::IssueKind::Clutter, "", "", 12}}, 1250};
  EditCommand edit{"welcome-sign", EditOp::Update, geo::GeoPosition{41.87829, -87.6298, 2.0},
                   geo::heading_to_orientation(180), geo::Vec3{3, 1.5, 0.05}, "designer-1"};
  return {
      {1, ClientHello{"user-1", Role::Client, pixel(), kProtocolVersion}},
      {2, PoseUpdate{"user-1", {1200, tracking::SensorReading{{41.8781, -87.6298, 0.0}, 4.5,
                                                              geo::heading_to_orientation(45)}}}},
      {3, telemetry},
      {1, ContentSnapshot{7, "minimal", {41.8781, -87.6298, 0.0}, {sign()}, 0, 1}},
      {2, ContentDelta{8, {sign()}, {"old-poster"}}},
      {5, edit},
      {3, UserJoined{{"user-1", Role::Client, pixel()}}},
      {4, UserLeft{"user-1", "timeout"}},
      {5, Ack{5}},
      {6, ErrorMessage{ErrorCode::BadMessage, "must be > 0", "body.evidence.horizontal_accuracy_m", 2}},
      {4, FrameThumbnail{"user-1", 1200, {41.8781, -87.6298, 1.6}, geo::heading_to_orientation(70),
                         "iVBORw0KGgo="}},
      {9, MonitorFrame{42, 4200, 8, {view}, 0, 1}},
  };
}

TEST(ProtocolGolden, EveryVariantMatchesFixtureByteForByte) {
  const auto messages = golden_messages();
  ASSERT_EQ(messages.size(), std::variant_size_v<Body>);
  const bool update = std::getenv("ARSTAGE_UPDATE_GOLDEN") != nullptr;
  for (const auto& m : messages) {
    const std::string tag(tag_of(m.body));
    const auto path = kGolden / (tag + ".json");
    const std::string bytes = encode(m);
    if (update) {
      std::filesystem::create_directories(kGolden);
      std::ofstream(path, std::ios::binary) << bytes << "\n";
    }
    std::string golden = read_file(path);
    ASSERT_FALSE(golden.empty()) << "missing fixture " << path;
    golden.pop_back();  // trailing newline
    EXPECT_EQ(bytes, golden) << tag;
    EXPECT_EQ(decode(golden), m) << tag;
  }
}

TEST(ProtocolGolden, FixturesConformToDocumentedSchema) {
  testgen::SchemaChecker checker;
  for (const auto& m : golden_messages()) {
    EXPECT_EQ(checker.check(encode(m)), std::vector<std::string>{}) << tag_of(m.body);
  }
}

TEST(ProtocolSchema, EveryDocumentedFieldIsExercised) {
  testgen::SchemaChecker checker;
  testgen::MessageGen gen(11);
  for (int i = 0; i < 3000; ++i) {
    const auto problems = checker.check(encode(gen.message()));
    ASSERT_TRUE(problems.empty()) << problems.front();
  }
  for (const auto& m : golden_messages()) checker.check(encode(m));
  for (const auto& type : schema::object_types()) {
    for (const auto& f : type.fields) {
      EXPECT_TRUE(checker.covered().count(std::string(type.name) + "." + std::string(f.name)))
          << type.name << "." << f.name << " is documented but never encoded";
    }
  }
}

TEST(ProtocolSchema, CommittedReferenceIsCurrent) {
  const auto doc = read_file(std::filesystem::path(ARSTAGE_SOURCE_DIR) / "docs" / "protocol.md");
  EXPECT_EQ(doc, schema::reference_markdown())
      << "regenerate with: arstage export-protocol-doc --out docs/protocol.md";
}

TEST(ProtocolProperties, RoundTripAndCanonical) {
  testgen::MessageGen gen(2024);
  std::array<int, std::variant_size_v<Body>> per_variant{};
  for (int i = 0; i < 12000; ++i) {
    const Message m = gen.message(static_cast<std::size_t>(i) % std::variant_size_v<Body>);
    const std::string bytes = encode(m);
    const Message back = decode(bytes);
    ASSERT_EQ(back, m) << bytes;
    ASSERT_EQ(encode(back), bytes);
    ++per_variant[m.body.index()];
  }
  for (int n : per_variant) EXPECT_EQ(n, 1000);
}

TEST(ProtocolFuzz, RandomBytesNeverCrash) {
  std::mt19937_64 rng(77);
  int errors = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string bytes(std::uniform_int_distribution<int>(0, 256)(rng), '\0');
    for (auto& c : bytes) c = static_cast<char>(rng());
    try {
      (void)decode(bytes);
    } catch (const ProtocolError& e) {
      ++errors;
      EXPECT_TRUE(e.code() == ErrorCode::BadMessage || e.code() == ErrorCode::TooLarge);
    }
  }
  EXPECT_EQ(errors, 10000);
}

TEST(ProtocolFuzz, MutatedMessagesYieldErrorOrValidMessage) {
  testgen::MessageGen gen(78);
  std::mt19937_64 rng(79);
  int valid = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string bytes = encode(gen.message());
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < edits && !bytes.empty(); ++k) {
      const std::size_t pos = rng() % bytes.size();
      switch (rng() % 3) {
        case 0: bytes[pos] = static_cast<char>(rng()); break;
        case 1: bytes.erase(pos, 1 + rng() % 8); break;
        default: bytes.insert(pos, 1, "{}[]\",:0-e."[rng() % 11]); break;
      }
    }
    try {
      const Message m = decode(bytes);
      ++valid;
      ASSERT_EQ(decode(encode(m)), m);  // whatever decodes is a valid message
    } catch (const ProtocolError& e) {
      ASSERT_EQ(e.code(), ErrorCode::BadMessage) << e.what();
    }
  }
  EXPECT_GT(valid, 0);
}

TEST(ProtocolValidation, NegativeAccuracyNamesField) {
  Message m{1, PoseUpdate{"u", {0, tracking::SensorReading{{41.8, -87.6, 0}, 3.0, {}}}}};
  auto j = nlohmann::json::parse(encode(m));
  j["body"]["evidence"]["horizontal_accuracy_m"] = -1.0;
  try {
    decode(j.dump());
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadMessage);
    EXPECT_EQ(e.path(), "body.evidence.horizontal_accuracy_m");
    EXPECT_EQ(e.to_message(1).path, "body.evidence.horizontal_accuracy_m");
  }
}

TEST(ProtocolValidation, FieldPathsAndRules) {
  auto expect_path = [](const std::string& text, const std::string& path) {
    try {
      decode(text);
      ADD_FAILURE() << "accepted " << text;
    } catch (const ProtocolError& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadMessage) << text;
      EXPECT_EQ(e.path(), path) << e.what();
    }
  };
  expect_path(R"({"t":"nope","seq":1,"body":{}})", "t");
  expect_path(R"({"t":"ack","body":{"ref_seq":1}})", "seq");
  expect_path(R"({"t":"ack","seq":-1,"body":{"ref_seq":1}})", "seq");
  expect_path(R"({"t":"ack","seq":1,"body":{"ref_seq":"x"}})", "body.ref_seq");
  expect_path(R"([1,2])", "$");
  expect_path(R"({"t":"snapshot","seq":1,"body":{"revision":1,"project_name":"p","origin":{"lat":1,"lon":2},"items":[{"id":"a","kind":"mesh","lat":1,"lon":2,"scale":[1,0,1]}],"chunk_index":0,"chunk_count":1}})",
              "body.items[0].scale[1]");
  expect_path(R"({"t":"snapshot","seq":1,"body":{"revision":1,"project_name":"p","origin":{"lat":1,"lon":2},"items":[],"chunk_index":1,"chunk_count":1}})",
              "body.chunk_index");
  expect_path(R"({"t":"hello","seq":1,"body":{"client_id":"a","role":"client","protocol_version":"one","profile":{}}})",
              "body.profile.model");
  expect_path(R"({"t":"edit","seq":1,"body":{"item_id":"a","op":"move","editor_id":"d"}})", "body.op");
  expect_path(R"({"t":"pose","seq":1,"body":{"client_id":"a","evidence":{"timestamp_ms":1,"mode":"slam","delta_pose":{"position":[0,0,0],"orientation":[2,0,0,0]},"tracking_quality":1}}})",
              "body.evidence.delta_pose.orientation");
  try {
    decode("{not json");
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadMessage);
  }
}

TEST(ProtocolValidation, UnknownFieldsTolerated) {
  const std::string text =
      R"({"t":"ack","seq":3,"extra":{"deep":[1,2]},"body":{"ref_seq":2,"future_field":true}})";
  const Message m = decode(text);
  EXPECT_EQ(m, (Message{3, Ack{2}}));
  EXPECT_EQ(encode(m), R"({"body":{"ref_seq":2},"seq":3,"t":"ack"})");
}

TEST(ProtocolValidation, VersionStrings) {
  EXPECT_EQ(parse_protocol_version("1.0"), (ProtocolVersion{1, 0}));
  EXPECT_EQ(parse_protocol_version("12.34"), (ProtocolVersion{12, 34}));
  for (const char* bad : {"", "1", "1.", ".1", "a.b", "1.0.0", "-1.0"}) {
    EXPECT_THROW(parse_protocol_version(bad), ValidationError) << bad;
  }
}

TEST(ProtocolLimits, OversizeRejected) {
  EXPECT_THROW(decode(std::string(kMaxMessageBytes + 1, ' ')), ProtocolError);
  Message m{1, ErrorMessage{ErrorCode::BadMessage, std::string(kMaxMessageBytes, 'x'), "", {}}};
  try {
    encode(m);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
  Message nan{1, Telemetry{"u", std::nan(""), 1, tracking::TrackingMode::SlamBased, {}, {}}};
  EXPECT_THROW(encode(nan), ValidationError);
}

TEST(ProtocolLimits, SnapshotChunking) {
  testgen::MessageGen gen(5);
  ContentSnapshot snap{99, "big", {41.8781, -87.6298, 0}, {}, 0, 1};
  for (int i = 0; i < 2000; ++i) {
    auto it = gen.item();
    it.id = "item-" + std::to_string(i);
    snap.items.push_back(it);
  }
  const auto chunks = encode_snapshot_chunks(snap, 10);
  ASSERT_GT(chunks.size(), 1u);
  SnapshotAssembler assembler;
  std::optional<ContentSnapshot> done;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_LE(chunks[i].size(), kMaxMessageBytes);
    const Message m = decode(chunks[i]);
    EXPECT_EQ(m.seq, 10 + i);
    const auto& c = std::get<ContentSnapshot>(m.body);
    EXPECT_EQ(c.chunk_index, i);
    EXPECT_EQ(c.chunk_count, chunks.size());
    done = assembler.add(c);
    EXPECT_EQ(done.has_value(), i + 1 == chunks.size());
  }
  EXPECT_EQ(*done, snap);

  // Small snapshots are a single chunk identical to a plain encode.
  ContentSnapshot small{1, "s", {0, 0, 0}, {sign()}, 0, 1};
  EXPECT_EQ(encode_snapshot_chunks(small, 4), std::vector<std::string>{encode({4, small})});
  ContentSnapshot empty{1, "e", {0, 0, 0}, {}, 0, 1};
  EXPECT_EQ(encode_snapshot_chunks(empty, 1).size(), 1u);

  auto huge = sign();
  huge.metadata["blob"] = std::string(kMaxMessageBytes, 'x');
  EXPECT_THROW(encode_snapshot_chunks({1, "h", {0, 0, 0}, {huge}, 0, 1}, 1), ProtocolError);
}

TEST(ProtocolLimits, MonitorChunking) {
  testgen::MessageGen gen(6);
  MonitorFrame frame{1, 100, 3, {}, 0, 1};
  for (int i = 0; i < 300; ++i) frame.users.push_back(gen.user_view());
  const auto chunks = encode_monitor_chunks(frame, 1);
  ASSERT_GT(chunks.size(), 1u);
  std::vector<UserView> users;
  for (const auto& c : chunks) {
    EXPECT_LE(c.size(), kMaxMessageBytes);
    const auto m = std::get<MonitorFrame>(decode(c).body);
    users.insert(users.end(), m.users.begin(), m.users.end());
  }
  EXPECT_EQ(users, frame.users);
}

TEST(ProtocolFraming, LengthPrefixRoundTripWithPartialReads) {
  testgen::MessageGen gen(7);
  std::vector<std::string> sent;
  std::string stream;
  for (int i = 0; i < 50; ++i) {
    sent.push_back(encode(gen.message()));
    stream += frame_length_prefixed(sent.back());
  }
  std::mt19937_64 rng(8);
  std::string buffer;
  std::vector<std::string> received;
  for (std::size_t pos = 0; pos < stream.size();) {
    const std::size_t n = std::min<std::size_t>(1 + rng() % 300, stream.size() - pos);
    buffer.append(stream, pos, n);
    pos += n;
    for (auto& f : unframe_length_prefixed(buffer)) received.push_back(std::move(f));
  }
  EXPECT_TRUE(buffer.empty());
  EXPECT_EQ(received, sent);
  std::string bogus("\xff\xff\xff\xff", 4);
  EXPECT_THROW(unframe_length_prefixed(bogus), ProtocolError);
}

TEST(SequenceValidation, Rules) {
  SequenceValidator v;
  EXPECT_NO_THROW(v.check(1));
  EXPECT_NO_THROW(v.check(2));
  EXPECT_NO_THROW(v.check(3));
  SequenceValidator gaps;
  EXPECT_NO_THROW(gaps.check(1));
  EXPECT_NO_THROW(gaps.check(3));
  SequenceValidator back;
  back.check(5);
  try {
    back.check(4);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeqRegression);
  }
  EXPECT_THROW(back.check(5), ProtocolError);  // duplicate
  EXPECT_EQ(back.last(), 5u);
  EXPECT_TRUE(back.accepts(6));
}

}  // namespace
