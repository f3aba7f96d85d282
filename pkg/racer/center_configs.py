def get_base_config():
    """Default parameters of every racer command, grouped like the command-line arguments."""
    centering = {
        'radius': None,
        'backend': 'exact-ring',
        'tie_break': 'lexicographic',
        'normalize': True,
        'tie_tol': 1e-9,
        'n_radial': None,  # 2R
        'n_angular': None,  # max(16, ceil(2 pi R))
        'ring_weights': 'pixel',
    }

    synth = {
        'extent': [211, 211],
        'object': 'hedgehog',
        'object_radius': 50,
        'shift': [0, 0],
        'partial': {
            'offset': None,
            'object': 'hedgehog',
            'radius': 50,
            'scale': 1.0,
            'visible': 0.5,
        },
    }

    noise = {
        'model': 'colored',
        'snr': 0.5,
        'seed': 0,
    }

    bench = {
        'radius': 57,
        'snr_grid': [1 / 2, 1 / 10, 1 / 50, 1 / 100, 1 / 200],
        'noise_models': ['colored'],
        'methods': ['scm', 'xcorr-noisy-2.5', 'xcorr-noisy-0.5', 'xcorr-lowpass', 'xcorr-gaussian', 'cm', 'gm'],
        'n_seeds': 10,
        'max_shift': 60,
        'lowpass_sigma': 2.0,
        'record_runtime': True,
    }

    rfa = {
        'max_iters': 20,
        'tol': 0.5,
        'max_shift': None,  # 2R
    }

    orchestration = {
        'threads': None,
        'json': False,
        'output': None,
        'experiment': 'racer-bench',
        'no_mlflow': False,
        'verbose': False,
    }

    return {'centering': centering, 'synth': synth, 'noise': noise, 'bench': bench, 'rfa': rfa, 'orchestration': orchestration}
