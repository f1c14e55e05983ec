#pragma once

#include <vector>

#include "foodrec/imaging.hpp"
#include "foodrec/interest.hpp"

namespace foodrec {

struct Region {
  std::vector<int> pixels;  // sorted linear indices y*width + x
  Eigen::Vector3d mean_color = Eigen::Vector3d::Zero();
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bounding box

  int count() const { return static_cast<int>(pixels.size()); }
};

struct SegmentLevel {
  int target_count = 0;          // the snapshot threshold this level was taken at
  std::vector<Region> regions;
  std::vector<int> parent_of_prev;  // for each region of the previous (finer) level
};

struct SegmentHierarchy {
  int width = 0, height = 0;
  std::vector<SegmentLevel> levels;  // fine to coarse
};

struct SegmentParams {
  std::vector<int> snapshot_counts = {1024, 256, 64, 16, 4};
  int superpixel_area_threshold = 65536;  // above this, start from 2x2 superpixels
  double zero_cost_eps = 1e-12;           // snapshots wait out zero-cost merge plateaus
  double adjacent_color_tol = 0.08;
  double center_window_frac = 0.5;
  double min_coverage_frac = 0.05;
};

/// Greedy agglomerative merging on the 4-connected pixel graph by minimum
/// mean-color distance; ties break on the smallest (region-id, region-id)
/// pair. Partitions are snapshotted when the region count first reaches each
/// threshold, deferring past zero-cost plateaus so flat areas never split a
/// level.
SegmentHierarchy hierarchical_segment(const Raster& rgb, const SegmentParams& params = {});

struct FoodRegion {
  std::vector<std::uint8_t> mask;  // width*height, 1 inside
  bool fallback = false;           // centered-window fallback was used
};

/// At the 16-region level, scores regions by pixel count x center prior and
/// returns the winner unioned with adjacent regions of similar mean color.
/// Falls back to the centered 50% window (flagged) when the level is a
/// single region or the selection covers <5% of the image.
FoodRegion select_food_region(const SegmentHierarchy& hierarchy, const SegmentParams& params = {});

struct MaskedImage {
  Raster image;    // cropped to the mask bounding box, out-of-mask pixels zeroed
  int offset_x = 0, offset_y = 0;
  std::vector<std::uint8_t> mask;  // cropped dimensions
};

MaskedImage apply_mask(const Raster& img, const std::vector<std::uint8_t>& mask);

/// Drops keypoints (in cropped coordinates) whose rounded position falls
/// outside the mask.
std::vector<Keypoint> filter_keypoints_by_mask(const std::vector<Keypoint>& keypoints,
                                               const MaskedImage& masked);

}  // namespace foodrec
