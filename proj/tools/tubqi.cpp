#include "tubqi/engine.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tubqi: quasi-isometry decision engine for tubular groups"};
  app.require_subcommand(1);

  std::string file_a, file_b, cert_path, convention = "example";
  bool json_out = false;
  unsigned long long max_candidates = 20000000ULL;
  double timeout = 0;
  int radius = 8;
  bool serial = false;

  auto* dec = app.add_subcommand("decide", "decide whether two presentations are quasi-isometric");
  dec->add_option("fileA", file_a)->required();
  dec->add_option("fileB", file_b)->required();
  dec->add_flag("--json", json_out, "emit the JSON certificate");
  dec->add_option("--max-candidates", max_candidates, "candidate budget before giving up");
  dec->add_option("--timeout", timeout, "wall-clock limit in seconds");
  dec->add_option("--convention", convention, "consistency convention: example|prose")
      ->check(CLI::IsMember({"example", "prose"}));
  dec->add_flag("--serial", serial, "disable the parallel extension scan");

  auto* ins = app.add_subcommand("inspect", "dump patterns, classes, potentials and max slope");
  ins->add_option("fileA", file_a)->required();
  ins->add_flag("--json", json_out, "emit JSON");

  auto* wit = app.add_subcommand("witness", "replay a certificate on a finite ball");
  wit->add_option("fileA", file_a)->required();
  wit->add_option("fileB", file_b)->required();
  wit->add_option("--cert", cert_path, "certificate JSON from decide --json")->required();
  wit->add_option("--radius", radius, "ball radius");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dec->parsed()) {
      std::string ta, tb;
      if (!read_file(file_a, ta)) {
        std::cerr << "cannot read " << file_a << "\n";
        return 2;
      }
      if (!read_file(file_b, tb)) {
        std::cerr << "cannot read " << file_b << "\n";
        return 2;
      }
      tubqi::DecideOptions opts;
      opts.json_output = json_out;
      opts.convention =
          convention == "prose" ? tubqi::Convention::Prose : tubqi::Convention::Example;
      opts.max_candidates = max_candidates;
      opts.timeout_seconds = timeout;
      opts.parallel = !serial;
      auto out = tubqi::decide_texts(file_a, ta, file_b, tb, opts);
      std::cout << out.report;
      if (!out.timing_note.empty()) std::cerr << out.timing_note << "\n";
      return out.exit_code;
    }
    if (ins->parsed()) {
      std::string ta;
      if (!read_file(file_a, ta)) {
        std::cerr << "cannot read " << file_a << "\n";
        return 2;
      }
      auto out = tubqi::inspect_text(file_a, ta, json_out);
      std::cout << out.report;
      return out.exit_code;
    }
    if (wit->parsed()) {
      std::string ta, tb, tc;
      if (!read_file(file_a, ta) || !read_file(file_b, tb) || !read_file(cert_path, tc)) {
        std::cerr << "cannot read inputs\n";
        return 2;
      }
      nlohmann::json cert = nlohmann::json::parse(tc);
      tubqi::CertificateInputs ci{file_a, ta, file_b, tb};
      if (auto err = tubqi::verify_certificate(cert, ci)) {
        // A broken assignment is exactly what the ball walk is for; anything
        // else (wrong inputs, unreproducible strategies) is a usage error.
        if (err->find("assignment does not satisfy") == std::string::npos) {
          std::cerr << "certificate does not verify: " << *err << "\n";
          return 2;
        }
        std::cerr << "warning: " << *err << "; replaying the ball anyway\n";
      }
      auto report = tubqi::witness_ball(cert, ci, radius);
      std::cout << "radius " << report.radius << ", " << report.nodes_visited
                << " state(s) visited, max |error| = " << report.max_abs_error.decimal() << "\n";
      for (size_t i = 0; i < report.matches.size(); ++i) {
        std::cout << "match " << report.matches[i].str();
        if (report.min_error[i])
          std::cout << ": error range [" << report.min_error[i]->decimal() << ", "
                    << report.max_error[i]->decimal() << "]";
        std::cout << "\n";
      }
      if (report.pass) {
        std::cout << "PASS\n";
        return 0;
      }
      std::cout << "FAIL: " << report.failure_reason << "\n";
      for (const auto& step : report.failure_path)
        std::cout << "  at " << step.match.str() << " error " << step.error.str() << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
