#include <catch2/catch_amalgamated.hpp>

#include <mbtree/config.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

using namespace mbtree;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + name;
  }
  ~TempFile() { std::remove(path.c_str()); }

  void fill(const std::string& text) const {
    std::ofstream f(path);
    f << text;
  }
};

}  // namespace

TEST_CASE("defaults match the documented parameters", "[config]") {
  Config c;
  REQUIRE(c.max_level == 10);
  REQUIRE(c.alpha == 0.3);
  REQUIRE(c.beta == 0.7);
  REQUIRE(c.theta == 2048);
  REQUIRE(c.rt_clamp == 1e3);
  REQUIRE(c.udp_timeout == 300);
  REQUIRE(c.stoplist_path.empty());
  REQUIRE(c.internal_prefixes.empty());
  REQUIRE(c.jobs == 0);
}

TEST_CASE("config files override defaults", "[config]") {
  TempFile f("mbtree.conf");
  f.fill("# scoring\n"
         "max_level = 12\n"
         "alpha=0.5\n"
         "  theta = 4096\n"
         "\n"
         "stoplist = /tmp/stop.txt\r\n"
         "udp_timeout = 120\n"
         "jobs = 4\n"
         "internal = 10.0.0.0/8,192.168.0.0/16\n"
         "internal = 172.16.0.0/12\n");
  Config c;
  load_config_file(f.path, c);
  REQUIRE(c.max_level == 12);
  REQUIRE(c.alpha == 0.5);
  REQUIRE(c.beta == 0.7);  // untouched
  REQUIRE(c.theta == 4096);
  REQUIRE(c.stoplist_path == "/tmp/stop.txt");
  REQUIRE(c.udp_timeout == 120);
  REQUIRE(c.jobs == 4);
  REQUIRE(c.internal_prefixes ==
          std::vector<std::string>{"10.0.0.0/8", "192.168.0.0/16", "172.16.0.0/12"});
}

TEST_CASE("config errors carry file and line", "[config]") {
  TempFile f("bad.conf");

  SECTION("unknown key") {
    f.fill("alpha = 0.5\nwibble = 3\n");
    try {
      Config c;
      load_config_file(f.path, c);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      REQUIRE(msg.find(":2:") != std::string::npos);
      REQUIRE(msg.find("wibble") != std::string::npos);
    }
  }
  SECTION("missing separator") {
    f.fill("alpha 0.5\n");
    Config c;
    REQUIRE_THROWS_AS(load_config_file(f.path, c), ConfigError);
  }
  SECTION("empty value") {
    f.fill("alpha =\n");
    Config c;
    REQUIRE_THROWS_AS(load_config_file(f.path, c), ConfigError);
  }
  SECTION("out-of-range alpha") {
    f.fill("alpha = 1.5\n");
    Config c;
    REQUIRE_THROWS_AS(load_config_file(f.path, c), ConfigError);
  }
  SECTION("trailing junk on a number") {
    f.fill("theta = 2048x\n");
    Config c;
    REQUIRE_THROWS_AS(load_config_file(f.path, c), ConfigError);
  }
  SECTION("negative jobs") {
    f.fill("jobs = -1\n");
    Config c;
    REQUIRE_THROWS_AS(load_config_file(f.path, c), ConfigError);
  }
  SECTION("missing file") {
    Config c;
    REQUIRE_THROWS_AS(load_config_file("/nonexistent/mbtree.conf", c), ConfigError);
  }
}
