#pragma once

#include "edr/image.hpp"
#include "edr/kernels.hpp"

namespace edr::filters {

kernels::Kernel delta_kernel();
kernels::Kernel gaussian_kernel(int size, double sigma);
/// Rotated elliptical Gaussian; `theta` is the angle of the x-axis of the ellipse.
kernels::Kernel anisotropic_gaussian_kernel(int size, double sigma_x, double sigma_y, double theta);
/// Laplacian of Gaussian, size 2*ceil(3*sigma)+1, shifted to sum exactly to zero.
kernels::Kernel log_kernel(double sigma);
/// Circularly symmetric low-pass (jinc) kernel with a Hamming window, normalized to sum 1.
/// `cutoff` is in radians per pixel, in (0, pi].
kernels::Kernel circular_sinc_kernel(int size, double cutoff);

GrayImage convolve(const GrayImage& img, const kernels::Kernel& kernel);
GrayImage median3(const GrayImage& img);
/// img - amount * LoG(img), saturated.
GrayImage sharpen_log(const GrayImage& img, double sigma, double amount);
/// Window radius ceil(2 * sigma_spatial).
GrayImage bilateral(const GrayImage& img, double sigma_spatial, double sigma_range);

/// Keys cubic convolution (a = -0.5), pixel-center aligned, replicated borders.
/// Shrinking stretches the kernel by the reduction factor (antialiased).
GrayImage resize_bicubic(const GrayImage& img, int out_width, int out_height);
GrayImage upscale_bicubic(const GrayImage& img, int scale);

struct EdgeDirectedParams {
  // Sobel magnitude where directional weighting starts to take over from bicubic;
  // fully directional at twice this value.
  double edge_threshold = 64.0;
  // Across-edge falloff of the directional weights, in source pixels.
  double across_sigma = 0.5;
};

/// Bicubic upscale whose 4x4 weights are attenuated across strong edges, so
/// near an edge the result is interpolated along the edge rather than through it.
GrayImage upscale_edge_directed(const GrayImage& img, int scale, const EdgeDirectedParams& params = {});

/// Integer-ratio box average; output is floor(dim / ratio) on each axis.
GrayImage downsample_area(const GrayImage& img, int ratio);

/// Central differences with replicated borders.
struct GradientField {
  kernels::Plane gx;
  kernels::Plane gy;
};
GradientField central_gradient(const GrayImage& img);
double mean_gradient_magnitude(const GrayImage& img);

}  // namespace edr::filters
