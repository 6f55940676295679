#ifndef PLATT_FFT_H_
#define PLATT_FFT_H_

#include <complex>
#include <span>

namespace platt {

// Real-input FFT of fixed size. Plans are created under a global lock;
// execution on distinct instances is thread-safe.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // Unnormalized forward transform: `in` has size() samples, `out` bins().
  void Forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: Inverse(Forward(x)) == size() * x.
  void Inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  int size_;
  double* real_;
  void* complex_;
  void* forward_;
  void* inverse_;
};

}  // namespace platt

#endif  // PLATT_FFT_H_
