# Regenerates the filtfilt_* fixtures with scipy (run from this directory).
import numpy as np
from scipy.signal import butter, sosfiltfilt

n = 600
for fs, order in ((250, 2), (360, 4)):
    t = np.arange(n) / fs
    x = (0.8 * np.sin(2 * np.pi * 1.3 * t) + 0.3 * np.sin(2 * np.pi * 17 * t + 0.4) + 0.2 * t
         + np.exp(-((t - 1.0) / 0.02) ** 2))
    sos = butter(order, [0.5, 40], 'bandpass', fs=fs, output='sos')
    np.savetxt(f'filtfilt_fs{fs}_o{order}_in.txt', x, fmt='%.17g')
    np.savetxt(f'filtfilt_fs{fs}_o{order}_out.txt', sosfiltfilt(sos, x), fmt='%.17g')
