"""
🔧 Core Package
시뮬레이터의 핵심 기능 모듈

- numkernels.py: 벡터 연산, 단체 사영
- model.py: 클라이언트 모델과 역전파
- losses.py: l_cont / l_ce / l_proto / l_uni
- pml.py: 로컬 학습 에폭, Adam
- cgl.py: 협업 그래프 학습
- network.py: 라운드 동기식 P2P 시뮬레이터
- scenarios.py: 합성 데이터 시나리오
- metrics.py: 정확도, 그래프 복원
- config.py: RunConfig
- commands.py: run / sweep / verify
- oracles.py: brute-force 검증 묶음
"""

from .config import RunConfig, resolve_config
from .errors import ConfigError, MaplError
from .network import NetworkState, run_experiment, run_round

__all__ = [
    'RunConfig',
    'resolve_config',
    'ConfigError',
    'MaplError',
    'NetworkState',
    'run_experiment',
    'run_round',
]
