from django.urls import path, include
from rest_framework.routers import DefaultRouter

from .views import CompileView, FaultCampaignViewSet, KernelListView, SimulationRunViewSet

app_name = 'harness'

# Router para ViewSets
router = DefaultRouter()
router.register(r'simulations', SimulationRunViewSet, basename='simulations')
router.register(r'campaigns', FaultCampaignViewSet, basename='campaigns')

urlpatterns = [
    path('kernels/', KernelListView.as_view(), name='kernels'),
    path('compile/', CompileView.as_view(), name='compile'),

    # ViewSets
    path('', include(router.urls)),
]
