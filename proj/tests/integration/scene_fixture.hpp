#pragma once

#include <json.hpp>

#include "support.hpp"

namespace testing {

// A 64x64 ring picture, a disk mask and a small wind scene in a temp dir.
struct SceneFixture {
  TempDir dir;

  explicit SceneFixture(const std::string& tag) : dir(tag) {
    write_png(ring_image(64, 32, 32, 18), dir / "image.png");
    write_mask(disk_mask(64, 32, 32, 20), dir / "mask.png");
    write(base());
  }

  static nlohmann::json base() {
    return {{"image", "image.png"},
            {"bodies", {{{"mask", "mask.png"}, {"mesh", {{"spacing", 5}, {"max_area", 30}}}}}},
            {"strokes", {{{"kind", "wind"}, {"path", {{0, 32}, {64, 32}}}, {"strength", 800}}}},
            {"rigs", {{{"kind", "fixed"}, {"at", {20, 32}}}}},
            {"sim", {{"frame_count", 3}}},
            {"output", {{"dir", "out"}}}};
  }

  std::filesystem::path write(const nlohmann::json& doc, const std::string& name = "scene.json") const {
    const auto path = dir / name;
    write_file(path, doc.dump(2));
    return path;
  }
};

}  // namespace testing
