// dacp-synth: writes a seeded demo corpus (transcripts with planted personal
// information plus replay documents) for trying the pipeline end to end.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dacp/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic demo corpus"};
  std::string out = "data";
  std::size_t transcripts = 2000, replay = 1000;
  std::uint64_t seed = 20240601;
  dacp::synthetic::TranscriptShape shape;
  shape.min_turns = 4;
  shape.min_duration = 60.0;
  shape.pii_rate = 0.2;
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--transcripts", transcripts, "Transcript count")->capture_default_str();
  app.add_option("--replay", replay, "Replay document count")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  app.add_option("--orgs", shape.orgs, "Distinct organizations")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--pii-rate", shape.pii_rate, "Chance a turn mentions a name or phone number")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto d = dacp::synthetic::write_demo_data(out, transcripts, replay, seed, shape);
    std::cout << d.transcripts.string() << " (" << transcripts << " transcripts)\n"
              << d.replay.string() << " (" << replay << " documents)\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
