// bulkdns: read names, run a lookup module over each, write JSON lines.

#include <fstream>
#include <iostream>
#include <memory>

#include "bulkdns/framework.hpp"
#include "bulkdns/testnet.hpp"

namespace {

bool is_std(const std::string& path) { return path.empty() || path == "-"; }

}  // namespace

int main(int argc, char** argv) {
  bulkdns::ScanConfig config;
  try {
    config = bulkdns::parse_cli(argc, argv);
  } catch (const bulkdns::CliExit& e) {
    (e.exit_code() == 0 ? std::cout : std::cerr) << e.what() << '\n';
    return e.exit_code();
  }

  try {
    std::unique_ptr<bulkdns::testnet::Testnet> net;
    if (!config.testnet_dir.empty()) {
      net = std::make_unique<bulkdns::testnet::Testnet>();
      for (auto& spec : bulkdns::testnet::load_fixture_dir(config.testnet_dir)) net->add_server(std::move(spec));
      net->start();
      config.nameserver_port = net->port();
      if (config.iterative) {
        config.root_hints = net->root_hints();
        if (config.root_hints.empty()) throw std::runtime_error("testnet has no $ROOT server");
      } else if (config.name_servers.empty()) {
        config.name_servers = net->recursive_servers();
        if (config.name_servers.empty()) throw std::runtime_error("testnet has no $RECURSIVE server");
      }
    }

    std::ifstream in_file;
    std::ofstream out_file;
    std::ofstream log_file;
    if (!is_std(config.input_path)) {
      in_file.open(config.input_path);
      if (!in_file) throw std::runtime_error("cannot open " + config.input_path);
    }
    if (!is_std(config.output_path)) {
      out_file.open(config.output_path);
      if (!out_file) throw std::runtime_error("cannot open " + config.output_path);
    }
    if (!is_std(config.log_path)) {
      log_file.open(config.log_path);
      if (!log_file) throw std::runtime_error("cannot open " + config.log_path);
    }
    std::istream& input = is_std(config.input_path) ? std::cin : in_file;
    std::ostream& output = is_std(config.output_path) ? std::cout : out_file;
    std::ostream& log = is_std(config.log_path) ? std::cerr : log_file;

    std::ios::sync_with_stdio(false);
    auto stats = bulkdns::run_scan(config, input, output, log);
    log << bulkdns::to_json(stats).dump() << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "bulkdns: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
