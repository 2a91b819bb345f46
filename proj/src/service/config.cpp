#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>

#include "recallkit/service.hpp"
#include "recallkit/text.hpp"

namespace recallkit::service {

namespace {

std::optional<std::filesystem::path> optional_path(const boost::property_tree::ptree& tree, const char* key,
                                                   const std::filesystem::path& base) {
  const auto value = tree.get_optional<std::string>(key);
  if (!value || text::trim(*value).empty()) return std::nullopt;
  std::filesystem::path p(std::string(text::trim(*value)));
  return p.is_absolute() ? p : base / p;
}

int parse_port(const std::string& value, const std::string& source) {
  std::int64_t port = 0;
  if (!text::parse_int(text::trim(value), port) || port < 0 || port > 65535) {
    throw ValidationError(source + ": port must be an integer in [0, 65535]");
  }
  return int(port);
}

}  // namespace

ServiceConfig ServiceConfig::load(const std::filesystem::path& file) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(file.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(file.string(), e.line(), e.message());
  }
  const auto base = file.parent_path();
  ServiceConfig c;
  c.host = tree.get<std::string>("server.host", c.host);
  if (auto port = tree.get_optional<std::string>("server.port")) c.port = parse_port(*port, file.string());
  if (auto dir = optional_path(tree, "data.data_dir", base)) c.data_dir = *dir;
  c.corpus_dir = optional_path(tree, "data.corpus_dir", base);
  c.model_path = optional_path(tree, "data.model_path", base);
  c.embeddings_path = optional_path(tree, "data.embeddings_path", base);
  return c;
}

void ServiceConfig::apply_env() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("RECALLKIT_HOST")) host = *v;
  if (auto v = env("RECALLKIT_PORT")) port = parse_port(*v, "RECALLKIT_PORT");
  if (auto v = env("RECALLKIT_DATA_DIR")) data_dir = *v;
  if (auto v = env("RECALLKIT_CORPUS_DIR")) corpus_dir = *v;
  if (auto v = env("RECALLKIT_MODEL_PATH")) model_path = *v;
  if (auto v = env("RECALLKIT_EMBEDDINGS")) embeddings_path = *v;
}

}  // namespace recallkit::service
