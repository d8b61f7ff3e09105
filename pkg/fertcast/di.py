from dependency_injector import containers, providers

from fertcast.file_manager import FileManager
from fertcast.pipeline import PipelineRunner
from fertcast.synthetic import SyntheticGenerator


class Container(containers.DeclarativeContainer):
    config = providers.Configuration(strict=True)

    file_manager = providers.Singleton(FileManager)

    synthetic_generator = providers.Singleton(SyntheticGenerator, file_manager)

    pipeline_runner = providers.Singleton(PipelineRunner, file_manager)


container_instance = Container()
