#!/usr/bin/env python

# PySliceMon
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup


setup(
    name='PySliceMon',
    version='1.0.0',
    description='SLA-aware closed-loop telemetry for network slices',
    long_description='Simulator and control loop for change-triggered in-band telemetry with per-slice '
                     'accuracy/overhead trade-offs, plus static, sampling and sketch baselines.',
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
    ],
    packages=[
        'pyslicemon',
        'pyslicemon.baselines',
        'pyslicemon.controlplane',
        'pyslicemon.core',
        'pyslicemon.dataplane',
        'pyslicemon.estimator',
        'pyslicemon.experiments',
        'pyslicemon.netsim',
    ],
    python_requires='>=3.8',
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "six",
        "pyyaml",
        "click",
        "python-dotenv",
        "sentry-sdk",
        "simpy",
    ],
    extras_require={
        'test': ["pytest"],
    },
    entry_points={
        'console_scripts': ['pyslicemon = pyslicemon.cli:main'],
    },
)
