import configparser
import math
import os
from dotenv import load_dotenv

from src.constellation import ConstellationKind
from src.errors import ConfigError
from src.scheme import SchemeConfig, make_scheme
from src.simulator import CeeMode, EnergyNormalization, SimPlan

# Build absolute paths from the project root
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
env_path = os.path.join(project_root, '.env')
config_path = os.path.join(project_root, 'config.ini')

load_dotenv(dotenv_path=env_path)

_MISSING = object()


def parse_grid(text: str, cast=float) -> list:
    """
    Parses 'start:step:stop' (stop inclusive) or a comma-separated list.
    """
    text = str(text).strip()
    if not text:
        return []
    if ':' in text:
        parts = text.split(':')
        if len(parts) != 3:
            raise ConfigError(f"Grid '{text}' must have the form start:step:stop.")
        start, step, stop = (float(p) for p in parts)
        if step == 0:
            raise ConfigError(f"Grid '{text}' has a zero step.")
        count = math.floor((stop - start) / step + 1e-9) + 1
        values = [round(start + i * step, 10) for i in range(max(count, 0))]
    else:
        values = [float(p) for p in text.split(',') if p.strip()]
    if cast is int:
        if any(v != int(v) for v in values):
            raise ConfigError(f"Grid '{text}' must contain whole numbers.")
        return [int(v) for v in values]
    return [cast(v) for v in values]


def format_grid(values) -> str:
    if isinstance(values, str):
        return values
    return ",".join(str(v) for v in values)


class Config:
    """
    Handles loading and providing access to all configuration parameters
    from config.ini and environment variables.
    """
    def __init__(self, config_file=config_path):
        self.config = configparser.ConfigParser()
        if not os.path.exists(config_file):
            raise FileNotFoundError(f"Configuration file not found: {config_file}")
        self.config.read(config_file)
        for section in ('SCHEME', 'SIMULATION', 'OUTPUT'):
            if not self.config.has_section(section):
                self.config.add_section(section)

    def _get(self, section: str, key: str, cast=str, fallback=_MISSING):
        if not self.config.has_option(section, key):
            if fallback is _MISSING:
                raise ConfigError(f"Missing [{section}] {key} in the configuration.")
            return fallback
        raw = self.config.get(section, key).strip()
        try:
            if cast is bool:
                return self.config.getboolean(section, key)
            return cast(raw)
        except (ValueError, ConfigError) as e:
            raise ConfigError(f"Invalid value for [{section}] {key}: '{raw}' ({e})") from e

    def _set(self, section: str, key: str, value) -> None:
        self.config.set(section, key, str(value))

    # --- Scheme Parameters ---
    @property
    def scheme(self) -> str:
        """
        Returns the scheme family name (e.g. 'ti-gqsm-mbm'), or 'custom' to use
        the quadrature flag as given.
        """
        return self._get('SCHEME', 'scheme', fallback='custom').lower()

    @scheme.setter
    def scheme(self, value: str):
        self._set('SCHEME', 'scheme', value)

    @property
    def n_tx(self) -> int:
        return self._get('SCHEME', 'n_tx', int)

    @n_tx.setter
    def n_tx(self, value: int):
        self._set('SCHEME', 'n_tx', value)

    @property
    def n_active(self) -> int:
        return self._get('SCHEME', 'n_active', int)

    @n_active.setter
    def n_active(self, value: int):
        self._set('SCHEME', 'n_active', value)

    @property
    def m_rf(self) -> int:
        """
        Returns the number of RF mirrors per MBM transmit unit (0 disables MBM).
        """
        return self._get('SCHEME', 'm_rf', int, fallback=0)

    @m_rf.setter
    def m_rf(self, value: int):
        self._set('SCHEME', 'm_rf', value)

    @property
    def t_total(self) -> int:
        return self._get('SCHEME', 't_total', int, fallback=1)

    @t_total.setter
    def t_total(self, value: int):
        self._set('SCHEME', 't_total', value)

    @property
    def t_active(self) -> int:
        return self._get('SCHEME', 't_active', int, fallback=1)

    @t_active.setter
    def t_active(self, value: int):
        self._set('SCHEME', 't_active', value)

    @property
    def mod_order(self) -> int:
        return self._get('SCHEME', 'mod_order', int)

    @mod_order.setter
    def mod_order(self, value: int):
        self._set('SCHEME', 'mod_order', value)

    @property
    def taps(self) -> int:
        return self._get('SCHEME', 'taps', int, fallback=1)

    @taps.setter
    def taps(self, value: int):
        self._set('SCHEME', 'taps', value)

    @property
    def quadrature(self) -> bool:
        return self._get('SCHEME', 'quadrature', bool, fallback=True)

    @quadrature.setter
    def quadrature(self, value: bool):
        self._set('SCHEME', 'quadrature', 'true' if value else 'false')

    @property
    def constellation(self) -> ConstellationKind:
        return self._get('SCHEME', 'constellation', lambda v: ConstellationKind(v.upper()), fallback=ConstellationKind.PSK)

    @constellation.setter
    def constellation(self, value):
        self._set('SCHEME', 'constellation', ConstellationKind(str(getattr(value, 'value', value)).upper()).value)

    # --- Simulation Parameters ---
    @property
    def n_rx(self) -> int:
        return self._get('SIMULATION', 'n_rx', int, fallback=4)

    @n_rx.setter
    def n_rx(self, value: int):
        self._set('SIMULATION', 'n_rx', value)

    @property
    def snr_grid(self) -> list[float]:
        """
        Returns the SNR grid in dB; a single value when sweeping n_rx.
        """
        return self._get('SIMULATION', 'snr_grid', lambda v: parse_grid(v, float))

    @snr_grid.setter
    def snr_grid(self, value):
        self._set('SIMULATION', 'snr_grid', format_grid(value))

    @property
    def n_rx_grid(self) -> list[int]:
        return self._get('SIMULATION', 'n_rx_grid', lambda v: parse_grid(v, int), fallback=[])

    @n_rx_grid.setter
    def n_rx_grid(self, value):
        self._set('SIMULATION', 'n_rx_grid', format_grid(value))

    @property
    def cee_mode(self) -> CeeMode:
        return self._get('SIMULATION', 'cee_mode', lambda v: CeeMode(v.lower()), fallback=CeeMode.PERFECT)

    @cee_mode.setter
    def cee_mode(self, value):
        self._set('SIMULATION', 'cee_mode', CeeMode(str(getattr(value, 'value', value)).lower()).value)

    @property
    def sigma_e_sq(self) -> float:
        """
        Returns the estimation error variance used by the cee_fixed mode.
        """
        return self._get('SIMULATION', 'sigma_e_sq', float, fallback=0.0)

    @sigma_e_sq.setter
    def sigma_e_sq(self, value: float):
        self._set('SIMULATION', 'sigma_e_sq', value)

    @property
    def normalization(self) -> EnergyNormalization:
        """
        Returns how transmit energy is normalised: channel_use (default) or symbol.
        """
        return self._get('SIMULATION', 'normalization', lambda v: EnergyNormalization(v.lower()),
                         fallback=EnergyNormalization.CHANNEL_USE)

    @normalization.setter
    def normalization(self, value):
        self._set('SIMULATION', 'normalization',
                  EnergyNormalization(str(getattr(value, 'value', value)).lower()).value)

    @property
    def seed(self) -> int:
        return self._get('SIMULATION', 'seed', int, fallback=0)

    @seed.setter
    def seed(self, value: int):
        self._set('SIMULATION', 'seed', value)

    @property
    def max_frames(self) -> int:
        return self._get('SIMULATION', 'max_frames', int, fallback=2_000_000)

    @max_frames.setter
    def max_frames(self, value: int):
        self._set('SIMULATION', 'max_frames', value)

    @property
    def target_bit_errors(self) -> int:
        return self._get('SIMULATION', 'target_bit_errors', int, fallback=200)

    @target_bit_errors.setter
    def target_bit_errors(self, value: int):
        self._set('SIMULATION', 'target_bit_errors', value)

    @property
    def batch_size(self) -> int:
        return self._get('SIMULATION', 'batch_size', int, fallback=256)

    @batch_size.setter
    def batch_size(self, value: int):
        self._set('SIMULATION', 'batch_size', value)

    @property
    def workers(self) -> int:
        return self._get('SIMULATION', 'workers', int, fallback=1)

    @workers.setter
    def workers(self, value: int):
        self._set('SIMULATION', 'workers', value)

    @property
    def codebook_cap(self) -> int:
        """
        Returns the largest frame bit count for which a codebook may be materialised.
        """
        return self._get('SIMULATION', 'codebook_cap', int, fallback=24)

    @codebook_cap.setter
    def codebook_cap(self, value: int):
        self._set('SIMULATION', 'codebook_cap', value)

    # --- Output ---
    @property
    def results_dir(self) -> str:
        path = self._get('OUTPUT', 'results_dir', fallback='results')
        return path if os.path.isabs(path) else os.path.join(project_root, path)

    @results_dir.setter
    def results_dir(self, value: str):
        self._set('OUTPUT', 'results_dir', value)

    # --- Telegram Notifications ---
    @property
    def telegram_bot_token(self) -> str:
        """
        Returns the Telegram bot token for notifications.
        """
        return os.getenv("TELEGRAM_BOT_TOKEN")

    @property
    def telegram_chat_id(self) -> str:
        """
        Returns the Telegram chat ID for notifications.
        """
        return os.getenv("TELEGRAM_CHAT_ID")

    # --- Domain objects ---
    def scheme_config(self, **overrides) -> SchemeConfig:
        """
        Builds the SchemeConfig. Named families fix the quadrature flag and
        check their own constraints. Keyword overrides replace single fields
        without touching the stored configuration.
        """
        params = dict(
            n_tx=self.n_tx, n_active=self.n_active, m_rf=self.m_rf,
            t_total=self.t_total, t_active=self.t_active, mod_order=self.mod_order,
            taps=self.taps, constellation_kind=self.constellation,
        )
        params.update(overrides)
        if self.scheme == 'custom':
            return SchemeConfig(quadrature=self.quadrature, **params)
        return make_scheme(self.scheme, **params)

    def sim_plan(self) -> SimPlan:
        return SimPlan(
            cfg=self.scheme_config(),
            n_rx=self.n_rx,
            snr_grid=tuple(self.snr_grid),
            n_rx_grid=tuple(self.n_rx_grid),
            cee_mode=self.cee_mode,
            sigma_e_sq=self.sigma_e_sq,
            normalization=self.normalization,
            master_seed=self.seed,
            max_frames=self.max_frames,
            target_bit_errors=self.target_bit_errors,
            scheme=self.scheme,
            batch_size=self.batch_size,
        )

    def save(self, path: str) -> str:
        """
        Writes the fully-resolved configuration; reading it back yields the
        same SchemeConfig and SimPlan.
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w') as f:
            self.config.write(f)
        return path
