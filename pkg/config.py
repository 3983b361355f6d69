#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Konfigurační soubor pro laboratoř bateriové arbitráže.
Obsahuje konstanty a výchozí nastavení všech modulů.
"""

# Verze aplikace
APP_VERSION = "1.0.0"
APP_NAME = "Battery Arbitrage Lab"

# Parametry baterie z případové studie (Li-Ion, 10 MWh)
BATTERY_CAPACITY_MWH = 10.0
BATTERY_SOC_MIN = 0.2
BATTERY_SOC_MAX = 0.8
BATTERY_P_MIN_MW = -2.5
BATTERY_P_MAX_MW = 2.5
BATTERY_ETA_CHARGE = 0.92
BATTERY_ETA_DISCHARGE = 1.0 / 0.92
BATTERY_SELF_DISCHARGE = 0.0
BATTERY_PEUKERT = 1.14
BATTERY_CYCLES_TO_FAILURE = 6000
BATTERY_INVEST_COST = 300_000.0  # $/MWh, násobí se kapacitou
BATTERY_DT_HOURS = 1.0
INITIAL_SOC = 0.5

# Vstupní CSV s tržními daty
CSV_COLUMNS = ["timestamp", "price", "demand"]

# Příznaky, ze kterých se skládají okna pro prognózy
AVAILABLE_FEATURES = ["price", "demand", "hour_sin", "hour_cos"]
DEFAULT_FEATURES = ["price", "demand", "hour_sin", "hour_cos"]
DEFAULT_WINDOW_SIZE = 24

# Chronologické dělení řady, pokud konfigurace neurčí jinak (podíl délky)
DEFAULT_SPLIT_FRACTIONS = (0.7, 0.8)

# Syntetický generátor cen (náhrada za data AESO)
SYNTHETIC_LENGTH_HOURS = 8760
SYNTHETIC_SEED = 1
SYNTHETIC_SPIKE_RATE = 0.01
SYNTHETIC_BASE_PRICE = 60.0
SYNTHETIC_AMPLITUDE = 25.0
SYNTHETIC_NOISE_SCALE = 5.0
SYNTHETIC_NOISE_PERSISTENCE = 0.5
SYNTHETIC_NOISE_CLIP = 3.0  # v násobcích stacionární směrodatné odchylky
SYNTHETIC_SPIKE_MIN = 5.0
SYNTHETIC_SPIKE_MAX = 20.0
SYNTHETIC_DEMAND_BASE = 9500.0
SYNTHETIC_DEMAND_AMPLITUDE = 800.0
SYNTHETIC_DEMAND_NOISE = 100.0
SYNTHETIC_START = "2022-01-01T00:00:00Z"

# Horizonty prognóz v hodinách
FORECAST_HORIZONS = [1, 2, 3, 6, 12, 18, 24]
HORIZON_GROUPS = {
    "short": [1, 2, 3],
    "middle": [6, 12],
    "long": [18, 24],
    "all": [1, 2, 3, 6, 12, 18, 24],
}

# Prognostické modely
FORECASTER_KINDS = ["persistence", "ar", "neural"]
MAPE_EPSILON = 1.0  # CAD/MWh, menší skutečné hodnoty se do MAPE nezapočítají
AR_ORDER = 24
AR_DIFFERENCE = 0
AR_RIDGE = 1e-8
FORECASTER_HIDDEN_WIDTHS = [64]
FORECASTER_ACTIVATION = "relu"
FORECASTER_DIR = "forecasters"

# Neuronová síť a trénink
ACTIVATIONS = ["identity", "relu", "tanh"]
OPTIMIZERS = ["sgd", "adam"]
LOSSES = ["mse", "rmse"]
TRAIN_LEARNING_RATE = 1e-3
TRAIN_BATCH_SIZE = 64
TRAIN_MAX_EPOCHS = 200
TRAIN_PATIENCE = 10
TRAIN_OPTIMIZER = "adam"
TRAIN_SEED = 0
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
CHECKPOINT_VERSION = 1

# DQN agent
DQN_GAMMA = 0.99
DQN_LEARNING_RATE = 1e-3
DQN_BUFFER_SIZE = 100_000
DQN_BATCH_SIZE = 64
DQN_SYNC_INTERVAL = 1000
DQN_EPSILON_START = 1.0
DQN_EPSILON_END = 0.05
DQN_EPSILON_DECAY_FRACTION = 0.2  # podíl všech kroků, po který ε klesá
DQN_HIDDEN_WIDTHS = [64, 64]
DQN_REWARD_SCALE = 0.001
DQN_TRAIN_EVERY = 1
DQN_ACTION_COUNT = 3

# Metoda křížové entropie
CEM_POPULATION = 64
CEM_ELITE_FRACTION = 0.125
CEM_ITERATIONS = 100
CEM_INITIAL_STD = 1.0
CEM_STD_FLOOR = 1e-3
CEM_HIDDEN_WIDTHS = [16]

# Genetický algoritmus s posuvným horizontem
GA_HORIZON = 24
GA_POPULATION = 50
GA_GENERATIONS = 100
GA_CROSSOVER_RATE = 0.9
GA_MUTATION_RATE = 0.1
GA_MUTATION_STD = 0.5  # MW
GA_TOURNAMENT_SIZE = 3
GA_ELITISM = 2

# Dynamické programování
DP_RESOLUTION = 601  # jen pro mřížkový režim
DP_EXACT = True
DP_MERGE_TOLERANCE = 1e-12  # stavy nabití bližší než tato mez se slučují
DP_MAX_NODES = 5_000_000  # větší dosažitelná množina přepne na mřížku

# Experimenty
AGENT_KINDS = ["dqn", "cem", "mpc-ga", "dp"]
WRAPPER_MODES = ["none", "predicted", "perfect"]
SEGMENTS = ["train", "validation", "test", "all"]
EXPERIMENT_EPISODES = 50
EXPERIMENT_OUTPUT_DIR = "runs"
RUN_HASH_LENGTH = 10

# Sloupce výstupních CSV souborů
TRACE_COLUMNS = ["step", "timestamp", "price", "action", "corrected_action",
                 "soc", "grid_revenue", "degradation", "reward"]
HISTORY_COLUMNS = ["episode", "seed", "reward"]
CEM_COLUMNS = ["iteration", "best", "mean", "std"]
METRICS_COLUMNS = ["horizon", "kind", "rmse", "mae", "mape", "params"]
SUMMARY_COLUMNS = ["name", "kind", "seed", "reward", "activity", "episode_length"]
TIMING_COLUMNS = ["name", "kind", "compute_seconds"]
COMPARISON_COLUMNS = ["name", "mean_reward", "std_reward", "relative_gain",
                      "activity", "compute_seconds"]
SWEEP_COLUMNS = ["cell", "overrides", "mean_reward"]
CSV_FLOAT_FORMAT = "%.10g"

# Logování
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Návratové kódy příkazové řádky
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

# Výchozí hodnoty všech klíčů konfiguračního souboru (sekce.klíč -> hodnota).
# Typ výchozí hodnoty určuje, na jaký typ se převede text z INI souboru.
DEFAULT_OPTIONS = {
    "data.path": "",
    "data.fill_gaps": False,
    "data.synthetic": False,
    "data.splits": [],
    "synthetic.length_hours": SYNTHETIC_LENGTH_HOURS,
    "synthetic.seed": SYNTHETIC_SEED,
    "synthetic.spike_rate": SYNTHETIC_SPIKE_RATE,
    "synthetic.base_price": SYNTHETIC_BASE_PRICE,
    "synthetic.amplitude": SYNTHETIC_AMPLITUDE,
    "synthetic.noise_scale": SYNTHETIC_NOISE_SCALE,
    "synthetic.noise_persistence": SYNTHETIC_NOISE_PERSISTENCE,
    "synthetic.noise_clip": SYNTHETIC_NOISE_CLIP,
    "synthetic.spike_min": SYNTHETIC_SPIKE_MIN,
    "synthetic.spike_max": SYNTHETIC_SPIKE_MAX,
    "features": DEFAULT_FEATURES,
    "window_size": DEFAULT_WINDOW_SIZE,
    "smoothing.alpha": 0.0,
    "battery.capacity_mwh": BATTERY_CAPACITY_MWH,
    "battery.soc_min": BATTERY_SOC_MIN,
    "battery.soc_max": BATTERY_SOC_MAX,
    "battery.p_min": BATTERY_P_MIN_MW,
    "battery.p_max": BATTERY_P_MAX_MW,
    "battery.eta_charge": BATTERY_ETA_CHARGE,
    "battery.eta_discharge": BATTERY_ETA_DISCHARGE,
    "battery.self_discharge": BATTERY_SELF_DISCHARGE,
    "battery.peukert": BATTERY_PEUKERT,
    "battery.cycles_to_failure": BATTERY_CYCLES_TO_FAILURE,
    "battery.invest_cost": BATTERY_INVEST_COST,
    "battery.dt": BATTERY_DT_HOURS,
    "battery.initial_soc": INITIAL_SOC,
    "forecaster.kind": "neural",
    "forecaster.horizon": 1,
    "forecaster.ar_order": AR_ORDER,
    "forecaster.ar_difference": AR_DIFFERENCE,
    "forecaster.hidden_widths": FORECASTER_HIDDEN_WIDTHS,
    "forecaster.activation": FORECASTER_ACTIVATION,
    "forecaster.output_dir": FORECASTER_DIR,
    "train.learning_rate": TRAIN_LEARNING_RATE,
    "train.batch_size": TRAIN_BATCH_SIZE,
    "train.max_epochs": TRAIN_MAX_EPOCHS,
    "train.patience": TRAIN_PATIENCE,
    "train.optimizer": TRAIN_OPTIMIZER,
    "train.seed": TRAIN_SEED,
    "dqn.gamma": DQN_GAMMA,
    "dqn.learning_rate": DQN_LEARNING_RATE,
    "dqn.buffer_size": DQN_BUFFER_SIZE,
    "dqn.batch_size": DQN_BATCH_SIZE,
    "dqn.sync_interval": DQN_SYNC_INTERVAL,
    "dqn.epsilon_start": DQN_EPSILON_START,
    "dqn.epsilon_end": DQN_EPSILON_END,
    "dqn.epsilon_decay_fraction": DQN_EPSILON_DECAY_FRACTION,
    "dqn.hidden_widths": DQN_HIDDEN_WIDTHS,
    "dqn.reward_scale": DQN_REWARD_SCALE,
    "dqn.train_every": DQN_TRAIN_EVERY,
    "cem.population": CEM_POPULATION,
    "cem.elite_fraction": CEM_ELITE_FRACTION,
    "cem.iterations": CEM_ITERATIONS,
    "cem.initial_std": CEM_INITIAL_STD,
    "cem.hidden_widths": CEM_HIDDEN_WIDTHS,
    "ga.horizon": GA_HORIZON,
    "ga.population": GA_POPULATION,
    "ga.generations": GA_GENERATIONS,
    "ga.crossover_rate": GA_CROSSOVER_RATE,
    "ga.mutation_rate": GA_MUTATION_RATE,
    "ga.mutation_std": GA_MUTATION_STD,
    "ga.tournament_size": GA_TOURNAMENT_SIZE,
    "ga.elitism": GA_ELITISM,
    "ga.discrete": False,
    "dp.resolution": DP_RESOLUTION,
    "dp.exact": DP_EXACT,
    "dp.max_nodes": DP_MAX_NODES,
    "wrapper.mode": "none",
    "wrapper.horizons": [],
    "experiment.name": "experiment",
    "experiment.agent": "dqn",
    "experiment.seeds": [1],
    "experiment.episodes": EXPERIMENT_EPISODES,
    "experiment.output_dir": EXPERIMENT_OUTPUT_DIR,
    "experiment.workers": 1,
    "experiment.episode_hours": 0,
    "experiment.train_segment": "train",
    "experiment.eval_segment": "test",
    "experiment.baseline": "",
    "sweep.cap": 0,
    "sweep.seed": 0,
}

# Sekce, jejichž klíče nemají pevný seznam (mapy a mřížky)
FREE_FORM_SECTIONS = ["checkpoints", "sweep_grid"]
