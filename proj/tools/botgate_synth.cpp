// Writes the synthetic labeled corpus: corpus.jsonl and ground_truth.csv.
#include "botgate/errors.hpp"
#include "botgate/synthetic.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"Generate the synthetic labeled comment corpus."};
  app.name("botgate_synth");
  botgate::SyntheticOptions options;
  std::string output_dir = ".";
  app.add_option("--accounts", options.accounts)->capture_default_str();
  app.add_option("--bot-fraction", options.bot_fraction)->capture_default_str();
  app.add_option("--seed", options.seed)->capture_default_str();
  app.add_option("--output-dir,-o", output_dir)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = botgate::generate_synthetic_corpus(options);
    const std::filesystem::path dir(output_dir);
    std::filesystem::create_directories(dir);
    botgate::save_corpus(dir / "corpus.jsonl", corpus.comments);
    botgate::save_ground_truth(dir / "ground_truth.csv", corpus.ground_truth);
    std::cout << "wrote " << corpus.comments.size() << " comments and " << corpus.ground_truth.size()
              << " ground-truth rows to " << dir.string() << "\n";
  } catch (const botgate::Error &e) {
    std::cerr << "botgate_synth: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "botgate_synth: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
