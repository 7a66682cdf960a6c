// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every check compares library output against an
// independent oracle written here.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "dacp/eval/http_client.hpp"
#include "support.hpp"

using namespace dacp;
using namespace dacp::eval;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// ---------------------------------------------------------------------------
// 1. selection oracle equivalence

Outcome selection_equivalence() {
  Outcome o;
  testing::TempDir dir("accept-select");
  const auto corpus = synthetic::corpus(10'000, 101);
  testing::write_transcripts(dir / "t.jsonl", corpus);

  const auto t0 = std::chrono::steady_clock::now();
  const StageContext ctx{1, 1, "acceptance"};
  run_score((dir / "t.jsonl").string(), Tokenizer::word(), dir / "scores.jsonl", ctx);
  const auto streamed = run_select((dir / "scores.jsonl").string(), 1'000, dir / "ids.txt", ctx);
  const double elapsed = seconds_since(t0);

  std::vector<SelectionRecord> all;
  io::for_each_line(dir / "scores.jsonl",
                    [&](std::string_view line, std::size_t) { all.push_back(parse_selection_record(line)); });
  std::sort(all.begin(), all.end(), [](const SelectionRecord& a, const SelectionRecord& b) {
    return a.entropy_nats != b.entropy_nats ? a.entropy_nats > b.entropy_nats : a.id < b.id;
  });
  all.resize(std::min<std::size_t>(all.size(), 1'000));

  std::set<std::string> a, b;
  for (const auto& r : streamed) a.insert(r.id);
  for (const auto& r : all) b.insert(r.id);
  if (a != b) o.fail("streaming id set differs from full sort");
  if (streamed.size() != 1'000) o.fail(fmt("selected %zu", streamed.size()));
  if (elapsed >= 10.0) o.fail(fmt("took %.2f s", elapsed));
  if (o.pass) o.detail = fmt("10,000 transcripts, n=1,000, identical id sets, %.2f s", elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 2. entropy correctness

double oracle_entropy(const std::vector<std::string>& tokens) {
  std::map<std::string, double> counts;
  for (const auto& t : tokens) counts[t] += 1.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = c / static_cast<double>(tokens.size());
    h -= p * std::log(p);
  }
  return h;
}

Outcome entropy_correctness() {
  Outcome o;
  const Tokenizer tok = Tokenizer::word();
  std::mt19937_64 rng(202);
  const auto& vocab = synthetic::vocabulary();
  double worst = 0.0;
  for (int i = 0; i < 1'000; ++i) {
    const std::size_t len = 1 + rng() % 400;
    const std::size_t types = 1 + rng() % vocab.size();
    std::string text;
    for (std::size_t k = 0; k < len; ++k) text += (k ? " " : "") + vocab[rng() % types];
    worst = std::max(worst, std::abs(token_type_entropy(text, tok) - oracle_entropy(split_ws(text))));
  }
  if (worst > 1e-9) o.fail(fmt("max deviation %.3e nats", worst));

  if (token_type_entropy("same same same same", tok) != 0.0) o.fail("single type is not 0");
  for (std::size_t k : {2, 7, 50}) {
    std::string text;
    for (std::size_t i = 0; i < k; ++i) text += "w" + std::to_string(i) + " ";
    if (std::abs(token_type_entropy(text, tok) - std::log(static_cast<double>(k))) > 1e-12) {
      o.fail(fmt("%zu distinct types do not reach ln k", k));
    }
  }
  if (o.pass) o.detail = fmt("1,000 documents, max deviation %.1e nats; 0 and ln k attained", worst);
  return o;
}

// ---------------------------------------------------------------------------
// 3. filter fidelity

Outcome filter_fidelity() {
  Outcome o;
  testing::TempDir dir("accept-filter");
  const std::vector<double> durations{0.0, 60.0, 119.0, 119.9, 119.99, 119.999, 120.0, 120.001, 120.1, 121.0, 3600.0};
  const std::vector<int> speakers{1, 2, 3, 5};
  const std::vector<std::string> languages{"en", "es", "fr", "de", "en-US"};
  const std::set<std::string> allowed{"en", "es"};
  std::mt19937_64 rng(303);

  std::vector<Transcript> corpus;
  std::set<std::string> expected;
  std::size_t n = 0;
  while (corpus.size() < 12'000) {
    for (double d : durations) {
      for (int s : speakers) {
        for (const auto& lang : languages) {
          Transcript t;
          t.id = fmt("b%06zu", n++);
          t.org_id = "org-" + std::to_string(rng() % 7);
          t.language = lang;
          t.duration_s = d;
          // Extra turns reuse speakers, so turn count never stands in for speaker count.
          const int turns = s + static_cast<int>(rng() % 4);
          for (int k = 0; k < turns; ++k) {
            t.turns.push_back(Turn{"spk" + std::to_string(k % s), k * 500, "turn text " + std::to_string(k)});
          }
          if (d >= 120.0 && s >= 2 && allowed.count(lang)) expected.insert(t.id);
          corpus.push_back(std::move(t));
        }
      }
    }
  }
  testing::write_transcripts(dir / "in.jsonl", corpus);

  FilterOptions opts;
  opts.rule.min_duration_s = 120.0;
  opts.rule.min_speakers = 2;
  opts.rule.allowed_languages = {"en", "es"};
  opts.diversity.target_pool_size = corpus.size();
  opts.diversity.per_org_cap.reset();
  run_filter((dir / "in.jsonl").string(), opts, dir / "out.jsonl", dir / "report.json", {9, 4, "acceptance"});

  std::set<std::string> accepted;
  io::for_each_line(dir / "out.jsonl", [&](std::string_view line, std::size_t) { accepted.insert(parse_transcript(line).id); });
  std::size_t false_accepts = 0, false_rejects = 0;
  for (const auto& id : accepted) false_accepts += !expected.count(id);
  for (const auto& id : expected) false_rejects += !accepted.count(id);
  if (false_accepts || false_rejects) o.fail(fmt("%zu false accepts, %zu false rejects", false_accepts, false_rejects));
  if (o.pass) o.detail = fmt("%zu planted cases, %zu eligible, zero false accepts/rejects", corpus.size(), expected.size());
  return o;
}

// ---------------------------------------------------------------------------
// 4. anonymization leak-freedom

const std::vector<std::string> kPlantedNames = {"Jordan Lee", "Sam Park",    "Alex Kim",     "Riley Chen", "Casey Ortiz",
                                                "Morgan Diaz", "Taylor Shah", "Quinn Novak", "Avery Brooks", "Drew Patel"};

struct Plant {
  std::string type, surface;
};

std::pair<std::string, std::vector<Plant>> planted_document(std::mt19937_64& rng) {
  std::string text;
  std::vector<Plant> plants;
  const int pieces = 2 + static_cast<int>(rng() % 8);
  for (int i = 0; i < pieces; ++i) {
    text += (text.empty() ? "" : " ") + synthetic::sentence(rng, 1, 6) + " ";
    Plant p;
    switch (rng() % 3) {
      case 0: p = {"PERSON_NAME", kPlantedNames[rng() % kPlantedNames.size()]}; break;
      case 1: p = {"PHONE_NUMBER", synthetic::phone_number(rng)}; break;
      default: p = {"EMAIL_ADDRESS", "user" + std::to_string(rng() % 300) + "@example.com"};
    }
    text += p.surface;
    plants.push_back(p);
  }
  return {text, plants};
}

/// Left-to-right numbering: a (type, surface) pair gets the next index of
/// its type the first time it appears.
std::string oracle_mask(const std::string& text, const std::vector<DetectionSpan>& spans) {
  std::map<std::string, int> next;
  std::map<std::pair<std::string, std::string>, int> seen;
  std::string out;
  std::size_t cursor = 0;
  for (const auto& s : spans) {
    out += text.substr(cursor, s.start - cursor);
    auto key = std::make_pair(s.info_type, s.surface);
    if (!seen.count(key)) seen[key] = ++next[s.info_type];
    out += "<" + s.info_type + "_" + std::to_string(seen[key]) + ">";
    cursor = s.end;
  }
  return out + text.substr(cursor);
}

Outcome anonymization_leak_freedom() {
  Outcome o;
  const nlohmann::json mask_policy_json = {
      {"seed", 404},
      {"info_types",
       {{{"name", "PHONE_NUMBER"}, {"regex", R"(\b\d{3}-\d{3}-\d{4}\b)"}},
        {{"name", "EMAIL_ADDRESS"}, {"regex", R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})"}},
        {{"name", "PERSON_NAME"}, {"dictionary", kPlantedNames}}}}};
  const auto mask_policy = AnonymizationPolicy::from_json(mask_policy_json);
  auto noise_json = mask_policy_json;
  noise_json["info_types"][2]["action"] = "noise";
  noise_json["info_types"][2]["pool"] = kPlantedNames;
  const auto noise_policy = AnonymizationPolicy::from_json(noise_json);

  std::mt19937_64 rng(404);
  std::size_t leaks = 0, numbering = 0, self_noise = 0, noised = 0, plants = 0, person_docs = 0;
  for (int i = 0; i < 5'000; ++i) {
    const auto [text, planted] = planted_document(rng);
    plants += planted.size();
    std::set<std::string> surfaces;
    for (const auto& p : planted) surfaces.insert(p.surface);

    const auto spans = detect(text, mask_policy);
    const auto masked = anonymize_text(text, mask_policy);
    for (const auto& s : detect(masked, mask_policy)) leaks += surfaces.count(s.surface);
    for (const auto& s : surfaces) leaks += masked.find(s) != std::string::npos;
    numbering += masked != oracle_mask(text, spans);
    const auto first_person = std::find_if(planted.begin(), planted.end(), [](const Plant& p) { return p.type == "PERSON_NAME"; });
    if (first_person != planted.end()) {
      ++person_docs;
      numbering += masked.find("<PERSON_NAME_1>") == std::string::npos;
      numbering += masked.find("<PERSON_NAME_0>") != std::string::npos;
    }

    ReplacementMap mapping;
    anonymize_text(text, noise_policy, mapping);
    for (const auto& [key, replacement] : mapping.entries()) {
      if (key.first != "PERSON_NAME") continue;
      ++noised;
      self_noise += replacement == key.second;
    }
  }
  if (leaks) o.fail(fmt("%zu planted surfaces survived masking", leaks));
  if (numbering) o.fail(fmt("%zu documents break the <TYPE_k> numbering", numbering));
  if (self_noise) o.fail(fmt("%zu names noised to themselves", self_noise));
  if (!noised) o.fail("no names were noised");
  if (o.pass) {
    o.detail = fmt("5,000 documents, %zu planted entities, zero leaks; %zu with persons numbered from <PERSON_NAME_1>; "
                   "%zu noised names, none mapped to itself",
                   plants, person_docs, noised);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 5. mixture tolerance

Outcome mixture_tolerance() {
  Outcome o;
  const Tokenizer tok = Tokenizer::word();
  std::map<std::string, std::vector<Document>> sources;
  for (const auto& [name, seed] : {std::pair<std::string, std::uint64_t>{"in_domain", 505}, {"replay", 506}}) {
    auto docs = synthetic::replay_documents(9'000, seed, 10, 200);
    for (auto& d : docs) {
      d.doc_id = name + "-" + d.doc_id;
      d.source = name;
      d.token_count = tok.count(d.text);
    }
    sources[name] = std::move(docs);
  }
  MixtureSpec spec;
  spec.components = {{"in_domain", "", 0.5}, {"replay", "", 0.5}};
  spec.total_token_budget = 1'000'000;
  spec.seed = 505;
  const auto mix = build_mixture(spec, sources);

  std::map<std::string, std::uint64_t> tokens;
  std::uint64_t max_doc = 0;
  for (const auto& d : mix.documents) tokens[d.source] += d.token_count;
  for (const auto& [_, docs] : sources) {
    for (const auto& d : docs) max_doc = std::max(max_doc, d.token_count);
  }
  const double tolerance = static_cast<double>(max_doc) / 1'000'000.0;
  double worst = 0.0;
  for (const auto& [name, t] : tokens) {
    const double share = static_cast<double>(t) / 1'000'000.0;
    worst = std::max(worst, std::abs(share - 0.5));
    if (std::abs(share - 0.5) > tolerance) o.fail(fmt("%s share %.6f outside 0.5 ± %.6f", name.c_str(), share, tolerance));
  }

  // The three ablation scales differ only in the budget.
  const fs::path configs = fs::path(DACP_SOURCE_DIR) / "configs";
  const std::vector<std::pair<std::string, std::uint64_t>> scales{
      {"mixture.ablation-1m.json", 1'000'000'000ULL}, {"mixture.ablation-5m.json", 5'000'000'000ULL},
      {"mixture.ablation-50m.json", 50'000'000'000ULL}};
  nlohmann::json base;
  for (const auto& [file, budget] : scales) {
    auto j = nlohmann::json::parse(io::read_file(configs / file));
    if (MixtureSpec::from_json(j).violations().size()) o.fail(file + " is invalid");
    if (j.at("total_token_budget").get<std::uint64_t>() != budget) o.fail(file + " has the wrong budget");
    j.erase("total_token_budget");
    if (base.is_null()) base = j;
    else if (j != base) o.fail(file + " differs in more than the budget");
  }
  if (o.pass) o.detail = fmt("worst |share - 0.5| = %.6f <= %.6f; 1B/5B/50B ablations differ only in budget", worst, tolerance);
  return o;
}

// ---------------------------------------------------------------------------
// 6. packing conservation

Outcome packing_conservation() {
  Outcome o;
  const Tokenizer tok = Tokenizer::word();
  const auto& vocab = synthetic::vocabulary();
  std::mt19937_64 rng(606);
  std::vector<Document> docs;
  docs.reserve(100'000);
  for (std::size_t i = 0; i < 100'000; ++i) {
    const std::size_t words = rng() % 121;
    std::string text;
    for (std::size_t k = 0; k < words; ++k) text += (k ? (rng() % 9 ? " " : ", ") : "") + vocab[rng() % vocab.size()];
    docs.push_back({fmt("doc-%06zu", i), "src", text, 0});
    docs.back().token_count = tok.count(docs.back().text);
  }
  // Long documents that must split across several windows at either length.
  for (std::size_t i = 0; i < 5; ++i) docs[i * 20'000].text.clear();
  for (std::size_t i = 0; i < 5; ++i) {
    auto& d = docs[i * 20'000 + 1];
    for (int k = 0; k < 20'000; ++k) d.text += vocab[rng() % vocab.size()] + " ";
    d.token_count = tok.count(d.text);
  }
  for (std::size_t i = 0; i < 5; ++i) docs[i * 20'000].token_count = 0;

  for (std::uint64_t L : {128ULL, 8000ULL}) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < docs.size(); ++i) index[docs[i].doc_id] = i;
    std::vector<std::vector<std::string>> rebuilt(docs.size());
    std::uint64_t windows = 0, over = 0;
    Packer packer(
        L,
        [&](PackedWindow&& w) {
          ++windows;
          if (w.tokens > L) ++over;
          for (std::size_t k = 0; k < w.spans.size(); ++k) {
            auto& tokens = rebuilt[index.at(w.spans[k].doc_id)];
            if (tokens.size() != w.spans[k].begin) o.fail("span out of order for " + w.spans[k].doc_id);
            for (auto& t : tok.tokenize(w.segments[k])) tokens.push_back(std::move(t));
          }
        },
        &tok);
    for (const auto& d : docs) packer.add(d);
    packer.finish();
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (rebuilt[i] != tok.tokenize(docs[i].text)) ++mismatched;
    }
    if (mismatched) o.fail(fmt("L=%llu: %zu documents do not reassemble", static_cast<unsigned long long>(L), mismatched));
    if (over) o.fail(fmt("L=%llu: %llu windows exceed L", static_cast<unsigned long long>(L), static_cast<unsigned long long>(over)));
    if (o.pass) {
      o.detail += fmt("%sL=%llu: %llu windows", o.detail.empty() ? "" : ", ", static_cast<unsigned long long>(L),
                      static_cast<unsigned long long>(windows));
    }
  }
  if (o.pass) o.detail = "100,000 documents reassemble exactly, no window over L (" + o.detail + ")";
  return o;
}

// ---------------------------------------------------------------------------
// 7. determinism across worker counts

Outcome determinism() {
  Outcome o;
  testing::TempDir dir("accept-determinism");
  const auto config = testing::write_desk_workspace(dir.path());
  std::vector<std::map<std::string, std::string>> outputs;
  for (std::size_t workers : {1, 8}) {
    auto j = nlohmann::json::parse(io::read_file(config));
    j["workers"] = workers;
    j["work_dir"] = (dir / ("work-" + std::to_string(workers))).string();
    io::write_file(dir / "run.json", j.dump());
    const auto cfg = load_config(dir / "run.json");
    run_pipeline(cfg);
    std::map<std::string, std::string> files;
    for (auto stage : kStages) {
      for (auto& [name, bytes] : testing::snapshot(stage_dir(cfg, stage))) files[std::string(stage) + "/" + name] = bytes;
    }
    outputs.push_back(std::move(files));
  }
  std::size_t shards = 0, manifests = 0;
  for (const auto& [name, _] : outputs[0]) {
    shards += name.ends_with(".jsonl");
    manifests += name.ends_with("manifest.json");
  }
  if (outputs[0] != outputs[1]) {
    for (const auto& [name, bytes] : outputs[0]) {
      if (!outputs[1].count(name) || outputs[1].at(name) != bytes) {
        o.fail("differs: " + name);
        break;
      }
    }
    if (o.pass) o.fail("file sets differ");
  }
  if (manifests < 2) o.fail("pipeline wrote no manifests");
  if (o.pass) o.detail = fmt("workers 1 vs 8: %zu files (%zu jsonl, %zu manifests) byte-identical", outputs[0].size(), shards, manifests);
  return o;
}

// ---------------------------------------------------------------------------
// 8. ROUGE fixtures

std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1U << a.size()); ++mask) {
    std::size_t j = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask >> i & 1U)) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j, ++len;
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

std::size_t brute_overlap(const std::vector<std::string>& c, const std::vector<std::string>& r, std::size_t n) {
  std::vector<bool> used(r.size() + 1, false);
  std::size_t hits = 0;
  for (std::size_t i = 0; i + n <= c.size(); ++i) {
    for (std::size_t j = 0; j + n <= r.size(); ++j) {
      if (used[j] || !std::equal(c.begin() + i, c.begin() + i + n, r.begin() + j)) continue;
      used[j] = true;
      ++hits;
      break;
    }
  }
  return hits;
}

double f1(std::size_t hits, std::size_t ctotal, std::size_t rtotal) {
  if (!hits) return 0.0;
  const double p = static_cast<double>(hits) / ctotal, r = static_cast<double>(hits) / rtotal;
  return 2 * p * r / (p + r);
}

Outcome rouge_fixtures() {
  Outcome o;
  const auto hand = rouge("the cat sat", "the cat ran");
  if (std::abs(hand.r1.f1 - 2.0 / 3.0) > 1e-9 || std::abs(hand.r2.f1 - 0.5) > 1e-9 || std::abs(hand.rl.f1 - 2.0 / 3.0) > 1e-9) {
    o.fail(fmt("hand example gives %.6f/%.6f/%.6f", hand.r1.f1, hand.r2.f1, hand.rl.f1));
  }
  std::mt19937_64 rng(808);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> c(1 + rng() % 12), r(1 + rng() % 12);
    for (auto& w : c) w = vocab[rng() % vocab.size()];
    for (auto& w : r) w = vocab[rng() % vocab.size()];
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& w : v) s += (s.empty() ? "" : " ") + w;
      return s;
    };
    const auto got = rouge(join(c), join(r));
    const double r1 = f1(brute_overlap(c, r, 1), c.size(), r.size());
    const double r2 = f1(brute_overlap(c, r, 2), c.size() > 1 ? c.size() - 1 : 0, r.size() > 1 ? r.size() - 1 : 0);
    const double rl = f1(brute_lcs(c, r), c.size(), r.size());
    worst = std::max({worst, std::abs(got.r1.f1 - r1), std::abs(got.r2.f1 - r2), std::abs(got.rl.f1 - rl)});
  }
  if (worst > 1e-9) o.fail(fmt("brute-force deviation %.3e", worst));

  const auto id = rouge("Refund the order today", "refund the order today");
  if (id.r1.f1 != 1.0 || id.r2.f1 != 1.0 || id.rl.f1 != 1.0) o.fail("identity is not exactly 1");
  for (const auto& s : {rouge("", "x y"), rouge("x y", ""), rouge("", "")}) {
    if (s.r1.f1 != 0.0 || s.r2.f1 != 0.0 || s.rl.f1 != 0.0) o.fail("emptiness is not exactly 0");
  }
  if (o.pass) o.detail = fmt("hand example 2/3, 1/2, 2/3; 50 brute-force pairs within %.1e; identity and emptiness exact", worst);
  return o;
}

// ---------------------------------------------------------------------------
// 9. judge protocol against a stub service

class StubJudgeService {
 public:
  explicit StubJudgeService(std::function<std::string(const std::string&)> answer) {
    server_.Post("/v1/judge", [answer = std::move(answer)](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      res.set_content(nlohmann::json{{"text", answer(body.at("prompt").get<std::string>())}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubJudgeService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/judge"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

Outcome judge_protocol() {
  Outcome o;
  // Ratings are scripted per response text so the service answers the same
  // way whichever position a response is shown in.
  std::map<std::string, CriteriaRatings> script;
  std::vector<EvalRecord> records;
  std::map<Verdict, std::size_t> direct;
  std::mt19937_64 rng(909);
  for (int i = 0; i < 100; ++i) {
    const std::string a = "candidate " + std::to_string(i), b = "baseline " + std::to_string(i);
    CriteriaRatings ra{}, rb{};
    for (auto& v : ra) v = 1 + static_cast<int>(rng() % 5);
    if (i < 45) rb = {1, 1, 1, 1}, ra[0] = std::max(ra[0], 2);
    else if (i < 74) ra = {1, 1, 1, 1}, rb = {5, 4, 5, 4};
    else rb = ra;
    script[a] = ra;
    script[b] = rb;
    const double ma = (ra[0] + ra[1] + ra[2] + ra[3]) / 4.0, mb = (rb[0] + rb[1] + rb[2] + rb[3]) / 4.0;
    ++direct[ma > mb ? Verdict::a : mb > ma ? Verdict::b : Verdict::tie];
    EvalRecord r;
    r.example_id = "ex" + std::to_string(i);
    r.task = i % 2 ? Task::action_items : Task::support_summary;
    if (r.task == Task::support_summary) r.slots = {{"Length Type", "medium"}, {"Format", "in bullet points"}};
    r.transcript = "Speaker 1: the order never arrived\nSpeaker 2: I will reship it today";
    r.candidate = a;
    r.baseline = b;
    records.push_back(std::move(r));
  }
  std::atomic<int> calls{0};
  StubJudgeService service([&](const std::string& prompt) {
    ++calls;
    const auto a_at = prompt.find("Model A Response: ") + 18;
    const auto b_at = prompt.find("\n\nModel B Response: ");
    const std::string shown_a = prompt.substr(a_at, b_at - a_at);
    const std::string shown_b = prompt.substr(b_at + 20, prompt.size() - b_at - 21);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto* r : {&script.at(shown_a), &script.at(shown_b)}) {
      for (int v : *r) arr.push_back({{"ratings", v}, {"rationale", "scripted"}});
    }
    return "Evaluation follows.\n" + arr.dump();
  });
  HttpJudgeClient client(service.url(), "stub");
  const auto templates = PromptTemplate::load_set(nlohmann::json::object());

  const auto plain = judge_all(make_judge_pairs(records, templates, std::nullopt), client, 4);
  const auto swapped = judge_all(make_judge_pairs(records, templates, 17), client, 4);
  std::size_t shown_swapped = 0, flips = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    shown_swapped += swapped[i].position_swapped;
    if (plain[i].status != JudgeStatus::judged || swapped[i].status != JudgeStatus::judged) o.fail("unjudged pair");
    flips += plain[i].verdict != swapped[i].verdict;
  }
  if (flips) o.fail(fmt("%zu verdicts change under position swap", flips));
  if (shown_swapped == 0) o.fail("no pair was shown swapped");

  const auto w = win_rates(swapped);
  if (w.wins_a != direct[Verdict::a] || w.wins_b != direct[Verdict::b] || w.ties != direct[Verdict::tie]) {
    o.fail(fmt("counts %zu/%zu/%zu, direct %zu/%zu/%zu", w.wins_a, w.wins_b, w.ties, direct[Verdict::a],
               direct[Verdict::b], direct[Verdict::tie]));
  }
  const std::string summary = judge_report(swapped, records)["summary"].get<std::string>();
  if (summary != "A 45%, B 29%, tie 26%") o.fail("reported \"" + summary + "\"");
  if (o.pass) {
    o.detail = fmt("%d stub calls, %zu shown swapped, counts match, reported \"%s\"", calls.load(), shown_swapped,
                   summary.c_str());
  }
  return o;
}

// ---------------------------------------------------------------------------
// 10. prompt fidelity

Outcome prompt_fidelity() {
  Outcome o;
  const std::string action_box =
      "For the conversation given below, generate a newline-separated list of work, business, or service-related "
      "TODO tasks that should be completed after the conversation. Each task is a one-sentence summary of the action "
      "to be taken.\n\nTranscript: ";
  const std::string summary_head = "Generate a ";
  const std::string summary_mid = " summary of the following conversation ";
  const std::string summary_tail = " without assessing its quality.\n\nTranscript: ";
  const std::string transcript = "Speaker 1: my card was charged twice\nSpeaker 2: I can reverse one charge now";

  std::size_t checked = 1;
  if (render_prompt(PromptTemplate::builtin(Task::action_items), {}, transcript) != action_box + transcript) {
    o.fail("action-items prompt differs");
  }
  const auto tmpl = PromptTemplate::builtin(Task::support_summary);
  for (const std::string length : {"long", "medium", "short"}) {
    for (const std::string format : {"in bullet points", "in a paragraph"}) {
      ++checked;
      const std::string expected = summary_head + length + summary_mid + format + summary_tail + transcript;
      if (render_prompt(tmpl, {{"Length Type", length}, {"Format", format}}, transcript) != expected) {
        o.fail("support-summary prompt differs for " + length + " / " + format);
      }
    }
  }
  if (o.pass) o.detail = fmt("%zu rendered prompts byte-identical", checked);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"selection oracle equivalence", selection_equivalence},
      {"entropy correctness", entropy_correctness},
      {"filter fidelity", filter_fidelity},
      {"anonymization leak-freedom", anonymization_leak_freedom},
      {"mixture tolerance", mixture_tolerance},
      {"packing conservation", packing_conservation},
      {"determinism", determinism},
      {"ROUGE fixtures", rouge_fixtures},
      {"judge protocol", judge_protocol},
      {"prompt fidelity", prompt_fidelity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
